//! Commands behind the `wavefield` binary.

pub mod bench;
pub mod compare;
pub mod estimate;
pub mod run;

use std::path::{Path, PathBuf};

use wavefield::solver::BackendKind;
use wavefield::{Error, Scenario};

pub use bench::{cmd_bench, BenchRow, BenchmarkReport};
pub use compare::{cmd_compare, CompareReport, ComponentError, StationReport, DEFAULT_BAND};
pub use estimate::{cmd_estimate, format_dhms};
pub use run::{cmd_run, RunSummary, MANIFEST_FILE};

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const DIVERGED: i32 = 3;
    pub const BACKEND_UNAVAILABLE: i32 = 4;
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BackendUnavailable(_) => exit::BACKEND_UNAVAILABLE,
        Error::Io(_) => exit::IO,
        _ => exit::VALIDATION,
    }
}

/// Command-line adjustments applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub level: Option<u8>,
    pub backend: Option<BackendKind>,
    pub steps: Option<usize>,
    pub strict_frequency: bool,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) {
        if let Some(l) = self.level {
            s.set_level(l);
        }
        if let Some(b) = self.backend {
            s.backend = b;
        }
        if let Some(n) = self.steps {
            s.domain.n_steps = Some(n);
        }
        if self.strict_frequency {
            s.strict_frequency = true;
        }
        if let Some(o) = &self.out {
            s.output_dir = Some(o.clone());
        }
    }
}

/// Output directory of a scenario: its own setting, else `output/<name>`.
pub fn output_dir(s: &Scenario) -> PathBuf {
    s.output_dir
        .clone()
        .unwrap_or_else(|| Path::new("output").join(&s.name))
}

/// Parses `0..3` (inclusive) or `0,1,3`.
pub fn parse_levels(text: &str) -> Result<Vec<u8>, String> {
    let bad = |e: std::num::ParseIntError| format!("bad level list `{text}`: {e}");
    if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (a.trim().parse::<u8>().map_err(bad)?, b.trim().parse::<u8>().map_err(bad)?);
        if a > b {
            return Err(format!("empty level range `{text}`"));
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse::<u8>().map_err(bad)).collect()
}

/// Parses `f_lo:f_hi` in Hz.
pub fn parse_band(text: &str) -> Result<(f64, f64), String> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| format!("band must look like 0.02:0.06, got `{text}`"))?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("band low corner: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("band high corner: {e}"))?;
    if !(lo > 0.0 && lo < hi) {
        return Err(format!("band needs 0 < f_lo < f_hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// One-line description of the host for benchmark reports.
pub fn machine_descriptor() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!(
        "{cpu}; {threads} hardware threads; {}-{}",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_lists() {
        assert_eq!(parse_levels("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_levels("2").unwrap(), vec![2]);
        assert_eq!(parse_levels("0, 4,5").unwrap(), vec![0, 4, 5]);
        assert!(parse_levels("3..1").is_err());
        assert!(parse_levels("x").is_err());
    }

    #[test]
    fn bands() {
        assert_eq!(parse_band("0.02:0.06").unwrap(), (0.02, 0.06));
        assert!(parse_band("0.06:0.02").is_err());
        assert!(parse_band("0.02").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::BackendUnavailable("x".into())), 4);
    }
}
