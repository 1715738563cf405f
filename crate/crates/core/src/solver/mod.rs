//! Time stepping of the nine staggered fields.
//!
//! A step runs four phases in order, each completing before the next starts:
//! stress update, source injection, velocity update, receiver recording.
//! The stress phase reads only velocities and the medium; the velocity phase
//! reads only stresses and the medium, so both update their outputs in place.

mod fields;
mod kernels;
mod sponge;
mod stencil;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use fields::FieldSet;
pub use sponge::{sponge_weight, SpongeProfile, FACE_NAMES};
pub use stencil::{derivative2, derivative4};

use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::medium::ParameterVolume;
use crate::real::Real;
use crate::receiver::{record_receivers, ReceiverPoint, TraceSet};
use crate::source::{inject_source, PointSource};
use kernels::Kernels;

/// CPU execution strategy. Both produce bitwise-identical fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Serial,
    #[default]
    Parallel,
}

/// Backend names accepted in scenarios and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    CpuSerial,
    #[default]
    CpuParallel,
    Gpu,
}

impl BackendKind {
    pub const ALL: [BackendKind; 3] = [BackendKind::CpuSerial, BackendKind::CpuParallel, BackendKind::Gpu];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::CpuSerial => "cpu-serial",
            BackendKind::CpuParallel => "cpu-parallel",
            BackendKind::Gpu => "gpu",
        }
    }

    /// The CPU backend implementing this kind.
    pub fn cpu(self) -> Result<Backend> {
        match self {
            BackendKind::CpuSerial => Ok(Backend::Serial),
            BackendKind::CpuParallel => Ok(Backend::Parallel),
            BackendKind::Gpu => Err(Error::BackendUnavailable(
                "no GPU device backend is compiled into this build".into(),
            )),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BackendKind::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::config(format!("unknown backend `{s}` (cpu-serial, cpu-parallel, gpu)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub backend: Backend,
    /// Pre-sample the medium at every staggered position once instead of every phase.
    pub cache_medium: bool,
    /// Full non-finite scan cadence in steps; 0 disables the scan.
    pub divergence_check_interval: usize,
    /// Half-width in cells of the band around the free surface using 2nd-order z derivatives.
    pub near_surface_band: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            backend: Backend::Parallel,
            cache_medium: false,
            divergence_check_interval: 10,
            near_surface_band: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub step: usize,
    /// Seconds, monotonic clock.
    pub wall_time: f64,
    pub max_abs_velocity: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub traces: TraceSet,
    pub reports: Vec<StepReport>,
    /// Set when the run stopped early on non-finite values; traces are partial.
    pub diverged: bool,
}

/// Everything needed to build a [`Simulation`].
#[derive(Debug, Clone)]
pub struct SimulationSetup<T> {
    pub grid: Grid,
    pub dt: f64,
    pub n_steps: usize,
    pub medium: ParameterVolume<T>,
    pub sponge: SpongeProfile,
    pub options: SolverOptions,
    pub sources: Vec<PointSource>,
    pub receivers: Vec<ReceiverPoint>,
}

/// One simulation driver owning its fields.
#[derive(Debug, Clone)]
pub struct Simulation<T> {
    kernels: Kernels<T>,
    fields: FieldSet<T>,
    dt: f64,
    n_steps: usize,
    check_interval: usize,
    sources: Vec<PointSource>,
    receivers: Vec<ReceiverPoint>,
    traces: TraceSet,
    t_index: usize,
    recording: bool,
}

impl<T: Real> Simulation<T> {
    pub fn new(setup: SimulationSetup<T>) -> Result<Self> {
        let SimulationSetup {
            grid,
            dt,
            n_steps,
            medium,
            sponge,
            options,
            sources,
            receivers,
        } = setup;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config(format!("time step must be positive, got {dt}")));
        }
        let traces = TraceSet::new(receivers.iter().map(|r| r.name.clone()).collect(), dt, n_steps);
        Ok(Simulation {
            kernels: Kernels::new(grid, dt, medium, &sponge, &options),
            fields: FieldSet::zeros(grid.dims()),
            dt,
            n_steps,
            check_interval: options.divergence_check_interval,
            sources,
            receivers,
            traces,
            t_index: 0,
            recording: true,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.kernels.grid()
    }

    pub fn medium(&self) -> &ParameterVolume<T> {
        self.kernels.volume()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Steps completed so far.
    pub fn current_step(&self) -> usize {
        self.t_index
    }

    pub fn fields(&self) -> &FieldSet<T> {
        &self.fields
    }

    pub fn fields_mut(&mut self) -> &mut FieldSet<T> {
        &mut self.fields
    }

    pub fn traces(&self) -> &TraceSet {
        &self.traces
    }

    pub fn into_traces(self) -> TraceSet {
        self.traces
    }

    /// Disables receiver recording (fields are unaffected either way).
    pub fn set_recording(&mut self, on: bool) {
        self.recording = on;
    }

    pub fn update_stresses(&mut self) -> bool {
        self.kernels.stress_phase(&mut self.fields).finite
    }

    pub fn update_velocities(&mut self) -> (f64, bool) {
        let s = self.kernels.velocity_phase(&mut self.fields);
        (s.max_abs, s.finite)
    }

    pub fn inject_sources(&mut self, t_index: usize) {
        let grid = *self.kernels.grid();
        for s in &self.sources {
            inject_source(&mut self.fields, s, &grid, t_index, self.dt);
        }
    }

    /// Advances one time step.
    pub fn step(&mut self) -> StepReport {
        let started = Instant::now();
        let t = self.t_index;
        let stress_ok = self.update_stresses();
        self.inject_sources(t);
        let (max_abs_velocity, vel_ok) = self.update_velocities();
        if self.recording {
            record_receivers(&self.fields, &self.receivers, &mut self.traces, t)
                .expect("trace column matches step index");
        }
        self.t_index += 1;
        let mut diverged = !(stress_ok && vel_ok);
        if !diverged && self.check_interval > 0 && self.t_index % self.check_interval == 0 {
            diverged = !self.fields.all_finite();
        }
        StepReport {
            step: t,
            wall_time: started.elapsed().as_secs_f64(),
            max_abs_velocity,
            diverged,
        }
    }

    /// Runs the remaining steps, stopping at the first diverged step.
    pub fn run(mut self) -> RunOutcome {
        let mut reports = Vec::with_capacity(self.n_steps.saturating_sub(self.t_index));
        let mut diverged = false;
        while self.t_index < self.n_steps {
            let r = self.step();
            reports.push(r);
            if r.diverged {
                log::warn!("simulation diverged at step {}", r.step);
                diverged = true;
                break;
            }
        }
        RunOutcome {
            traces: self.traces,
            reports,
            diverged,
        }
    }
}

/// One velocity phase over `fields` with the serial backend.
pub fn update_velocities<T: Real>(
    fields: &mut FieldSet<T>,
    medium: &ParameterVolume<T>,
    grid: &Grid,
    sponge: &SpongeProfile,
    dt: f64,
) -> bool {
    let opts = SolverOptions {
        backend: Backend::Serial,
        ..Default::default()
    };
    Kernels::new(*grid, dt, medium.clone(), sponge, &opts)
        .velocity_phase(fields)
        .finite
}

/// One stress phase over `fields` with the serial backend.
pub fn update_stresses<T: Real>(
    fields: &mut FieldSet<T>,
    medium: &ParameterVolume<T>,
    grid: &Grid,
    sponge: &SpongeProfile,
    dt: f64,
) -> bool {
    let opts = SolverOptions {
        backend: Backend::Serial,
        ..Default::default()
    };
    Kernels::new(*grid, dt, medium.clone(), sponge, &opts)
        .stress_phase(fields)
        .finite
}
