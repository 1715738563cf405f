use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavefield::solver::BackendKind;
use wavefield::{Error, Scenario};
use wavefield_cli::{
    cmd_bench, cmd_compare, cmd_estimate, cmd_run, exit, exit_code, format_dhms, parse_band,
    parse_levels, Overrides, DEFAULT_BAND,
};

#[derive(Parser)]
#[command(name = "wavefield", version, about = "Elastic wavefield simulation on layered media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Scenario file or bundled preset name.
    #[arg(long, default_value = "cuba-2016")]
    scenario: String,
    /// Level-of-detail preset overriding the scenario's grid, dt and step count.
    #[arg(long)]
    level: Option<u8>,
    /// cpu-serial, cpu-parallel or gpu.
    #[arg(long)]
    backend: Option<BackendKind>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write traces plus a manifest.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of time steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Fail instead of warning when the wavelet exceeds the grid frequency limit.
        #[arg(long)]
        strict_frequency: bool,
    },
    /// Time steps per level of detail and backend.
    Bench {
        /// Scenario file or bundled preset name.
        #[arg(long, default_value = "cuba-2016")]
        scenario: String,
        /// Levels, as `0..3` or `0,2,4`.
        #[arg(long, default_value = "0..3")]
        level: String,
        /// Backends to time; repeat or comma-separate. All three by default.
        #[arg(long, value_delimiter = ',')]
        backend: Vec<BackendKind>,
        /// Timed steps per row after the warm-up.
        #[arg(long)]
        steps: Option<usize>,
        /// Write `bench.toml` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare simulated traces against reference traces.
    Compare {
        /// Directory of simulated traces (with its manifest).
        #[arg(long)]
        sim: PathBuf,
        /// Directory of reference traces in the same format.
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Band-pass corners `f_lo:f_hi` in Hz.
        #[arg(long, value_parser = parse_band)]
        band: Option<(f64, f64)>,
        /// Write the report and overlay series here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project the wall time of an inversion campaign.
    Estimate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 1000)]
        simulations: u64,
        #[arg(long, default_value_t = 10)]
        iterations: u64,
        /// Measured seconds per step; a short probe runs when omitted.
        #[arg(long)]
        step_time: Option<f64>,
    },
    /// List bundled presets, or print one.
    Presets {
        name: Option<String>,
        #[arg(long)]
        level: Option<u8>,
    },
}

fn load(args: &ScenarioArgs, extra: Overrides) -> Result<Scenario, Error> {
    let mut s = Scenario::from_arg(&args.scenario)?;
    Overrides {
        level: args.level,
        backend: args.backend,
        ..extra
    }
    .apply(&mut s);
    Ok(s)
}

fn execute(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            steps,
            strict_frequency,
        } => {
            let s = load(
                &scenario,
                Overrides {
                    steps,
                    strict_frequency,
                    out,
                    ..Default::default()
                },
            )?;
            let summary = cmd_run(&s)?;
            println!(
                "{} steps in {:.2} s ({:.4} s/step); {} trace files in {}",
                summary.steps_completed,
                summary.info.steps_wall_s,
                summary.info.mean_step_wall_s,
                summary.trace_files.len(),
                summary.out_dir.display()
            );
            if summary.diverged {
                eprintln!(
                    "error: simulation diverged after {} steps; partial traces written",
                    summary.steps_completed
                );
                return Ok(exit::DIVERGED);
            }
            Ok(exit::SUCCESS)
        }
        Command::Bench {
            scenario,
            level,
            backend,
            steps,
            out,
        } => {
            let s = Scenario::from_arg(&scenario)?;
            let level = parse_levels(&level).map_err(Error::Config)?;
            let backends = if backend.is_empty() {
                BackendKind::ALL.to_vec()
            } else {
                backend
            };
            let report = cmd_bench(&s, &level, &backends, steps)?;
            print!("{}", report.table());
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("bench.toml"), report.to_toml()?)?;
            }
            Ok(exit::SUCCESS)
        }
        Command::Compare {
            sim,
            reference,
            band,
            out,
        } => {
            let report = cmd_compare(&sim, &reference, band.unwrap_or(DEFAULT_BAND), out.as_deref())?;
            print!("{}", report.table());
            Ok(exit::SUCCESS)
        }
        Command::Estimate {
            scenario,
            simulations,
            iterations,
            step_time,
        } => {
            let s = load(&scenario, Overrides::default())?;
            let resolved = s.resolve()?;
            let step = match step_time {
                Some(t) => t,
                None => {
                    let level = resolved.level.unwrap_or(0);
                    let report = cmd_bench(&s, &[level], &[s.backend], Some(10))?;
                    report.rows[0].mean_step_s
                }
            };
            let total = cmd_estimate(step, resolved.domain.n_steps, simulations, iterations);
            println!(
                "{step:.6} s/step x {} steps x {simulations} simulations x {iterations} iterations = {} (dd:hh:mm:ss)",
                resolved.domain.n_steps,
                format_dhms(total)
            );
            Ok(exit::SUCCESS)
        }
        Command::Presets { name, level } => {
            match name {
                None => {
                    for n in wavefield::scenario::preset_names() {
                        println!("{n}");
                    }
                }
                Some(n) => {
                    let mut s = Scenario::preset(&n)?;
                    if let Some(l) = level {
                        s.set_level(l);
                    }
                    print!("{}", s.to_toml()?);
                }
            }
            Ok(exit::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
