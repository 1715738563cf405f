use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use wavefield::scenario::RunInfo;
use wavefield::traceio::write_traces;
use wavefield::{Result, Scenario, Simulation};

use crate::output_dir;

/// Resolved configuration plus run facts, written next to the traces.
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub trace_files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub steps_completed: usize,
    pub diverged: bool,
    pub info: RunInfo,
}

/// Runs a scenario to completion and writes its traces and manifest.
///
/// Validation happens before any field is allocated. On divergence the
/// partial traces are still written and the manifest records the failure.
pub fn cmd_run(scenario: &Scenario) -> Result<RunSummary> {
    let resolved = scenario.resolve()?;
    for w in &resolved.warnings {
        log::warn!("{w}");
    }
    let setup_started = Instant::now();
    let setup = resolved.setup()?;
    let sim = Simulation::new(setup)?;
    let setup_wall_s = setup_started.elapsed().as_secs_f64();
    log::info!(
        "running {} on a {:?} grid for {} steps of {} s ({})",
        resolved.name,
        resolved.grid_dims(),
        resolved.domain.n_steps,
        resolved.domain.dt,
        resolved.backend
    );

    let started = Instant::now();
    let outcome = sim.run();
    let steps_wall_s = started.elapsed().as_secs_f64();
    let steps_completed = outcome.reports.len();
    let mean_step_wall_s = if steps_completed > 0 {
        outcome.reports.iter().map(|r| r.wall_time).sum::<f64>() / steps_completed as f64
    } else {
        0.0
    };

    let out_dir = output_dir(scenario);
    fs::create_dir_all(&out_dir)?;
    let traces = outcome.traces.with_start_time(resolved.domain.start_time);
    let trace_files = write_traces(&out_dir, &traces, &resolved.receivers)?;

    let info = RunInfo {
        version: env!("CARGO_PKG_VERSION").to_string(),
        dt_max_s: resolved.dt_max,
        max_frequency_hz: resolved.max_frequency,
        steps_completed,
        diverged: outcome.diverged,
        setup_wall_s,
        steps_wall_s,
        mean_step_wall_s,
        warnings: resolved.warnings.clone(),
    };
    let mut manifest = resolved.to_explicit();
    manifest.run = Some(info.clone());
    let manifest_path = out_dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest.to_toml()?)?;

    Ok(RunSummary {
        out_dir,
        trace_files,
        manifest: manifest_path,
        steps_completed,
        diverged: outcome.diverged,
        info,
    })
}
