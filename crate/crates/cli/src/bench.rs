use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use wavefield::solver::BackendKind;
use wavefield::{Error, Result, Scenario, Simulation};

use crate::machine_descriptor;

/// Untimed steps before the measured window.
pub const WARMUP_STEPS: usize = 10;

/// Measured window when no step count is given.
pub const DEFAULT_TIMED_STEPS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub level: u8,
    pub backend: BackendKind,
    pub grid: [usize; 3],
    pub cells: usize,
    pub timed_steps: usize,
    /// Seconds per step over the timed window.
    pub mean_step_s: f64,
    /// Setup plus every executed step plus trace retrieval.
    pub total_s: f64,
    /// Setup plus `mean_step_s` times the scenario's full step count.
    pub projected_run_s: f64,
    /// cpu-serial step time over this row's step time on the same level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speedup_vs_serial: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub scenario: String,
    pub machine: String,
    pub rows: Vec<BenchRow>,
    /// Backends that could not run, with the reason.
    #[serde(default)]
    pub skipped: Vec<String>,
}

impl BenchmarkReport {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize report: {e}")))
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "machine:  {}", self.machine);
        let _ = writeln!(
            s,
            "{:>5}  {:<12}  {:>14}  {:>12}  {:>12}  {:>14}  {:>8}",
            "level", "backend", "grid", "cells", "step (s)", "total (s)", "speed-up"
        );
        for r in &self.rows {
            let grid = format!("{}x{}x{}", r.grid[0], r.grid[1], r.grid[2]);
            let speedup = r.speedup_vs_serial.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:>5}  {:<12}  {:>14}  {:>12}  {:>12.6}  {:>14.3}  {:>8}",
                r.level,
                r.backend.name(),
                grid,
                r.cells,
                r.mean_step_s,
                r.total_s,
                speedup
            );
        }
        for k in &self.skipped {
            let _ = writeln!(s, "skipped: {k}");
        }
        s
    }
}

/// Times every level on every backend.
///
/// Unavailable backends are skipped with a notice; the call fails only if
/// nothing could run.
pub fn cmd_bench(
    scenario: &Scenario,
    levels: &[u8],
    backends: &[BackendKind],
    steps: Option<usize>,
) -> Result<BenchmarkReport> {
    let timed = steps.unwrap_or(DEFAULT_TIMED_STEPS).max(1);
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut skipped = Vec::new();
    let mut last_unavailable = None;
    for &level in levels {
        let mut s = scenario.clone();
        s.set_level(level);
        let resolved = s.resolve()?;
        for &backend in backends {
            let mut r = resolved.clone();
            r.backend = backend;
            let started = Instant::now();
            let setup = match r.setup() {
                Ok(setup) => setup,
                Err(e @ Error::BackendUnavailable(_)) => {
                    let note = format!("{backend} at level {level}: {e}");
                    log::warn!("{note}");
                    skipped.push(note);
                    last_unavailable = Some(e);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut sim = Simulation::new(setup)?;
            for _ in 0..WARMUP_STEPS {
                sim.step();
            }
            let window = Instant::now();
            for _ in 0..timed {
                sim.step();
            }
            let mean_step_s = window.elapsed().as_secs_f64() / timed as f64;
            let traces = sim.into_traces();
            let total_s = started.elapsed().as_secs_f64();
            let setup_s = (total_s - mean_step_s * (WARMUP_STEPS + timed) as f64).max(0.0);
            drop(traces);
            rows.push(BenchRow {
                level,
                backend,
                grid: r.grid_dims(),
                cells: r.domain.grid.len(),
                timed_steps: timed,
                mean_step_s,
                total_s,
                projected_run_s: setup_s + mean_step_s * r.domain.n_steps as f64,
                speedup_vs_serial: None,
            });
        }
    }
    if rows.is_empty() {
        return Err(last_unavailable.unwrap_or_else(|| Error::Config("no benchmark rows requested".into())));
    }
    let serial: Vec<(u8, f64)> = rows
        .iter()
        .filter(|r| r.backend == BackendKind::CpuSerial)
        .map(|r| (r.level, r.mean_step_s))
        .collect();
    for r in &mut rows {
        if let Some((_, t)) = serial.iter().find(|(l, _)| *l == r.level) {
            r.speedup_vs_serial = Some(t / r.mean_step_s);
        }
    }
    Ok(BenchmarkReport {
        scenario: scenario.name.clone(),
        machine: machine_descriptor(),
        rows,
        skipped,
    })
}
