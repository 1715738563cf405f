use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wavefield::geometry::Component;
use wavefield::signal::{bandpass, interpolate_at, relative_error, rms_error};
use wavefield::traceio::{read_trace_dir, TraceFile};
use wavefield::{Error, Result, Scenario};

use crate::run::MANIFEST_FILE;

/// Corner frequencies used when none are given, Hz.
pub const DEFAULT_BAND: (f64, f64) = (0.02, 0.06);

/// Fewest overlapping samples accepted for a comparison.
const MIN_OVERLAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentError {
    pub component: Component,
    pub samples: usize,
    /// m/s.
    pub rms: f64,
    /// Absent when the filtered reference is identically zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationReport {
    pub station: String,
    /// Source-to-station distance when the simulation manifest is available, meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<f64>,
    pub components: Vec<ComponentError>,
    pub mean_rms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_relative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub band_hz: [f64; 2],
    /// Nearest station first when distances are known.
    pub stations: Vec<StationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_mean_relative: Option<f64>,
}

impl CompareReport {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize report: {e}")))
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "band: {} - {} Hz", self.band_hz[0], self.band_hz[1]);
        let _ = writeln!(
            s,
            "{:<8}  {:>10}  {:>12}  {:>12}  {:>12}  {:>12}  {:>10}",
            "station", "dist (km)", "rms vx", "rms vy", "rms vz", "mean rms", "mean rel"
        );
        let opt = |v: Option<f64>, prec: usize| v.map(|x| format!("{x:.prec$}")).unwrap_or_else(|| "-".into());
        for st in &self.stations {
            let rms = |c: Component| {
                st.components
                    .iter()
                    .find(|e| e.component == c)
                    .map(|e| format!("{:.4e}", e.rms))
                    .unwrap_or_else(|| "-".into())
            };
            let _ = writeln!(
                s,
                "{:<8}  {:>10}  {:>12}  {:>12}  {:>12}  {:>12.4e}  {:>10}",
                st.station,
                opt(st.distance_m.map(|d| d / 1000.0), 1),
                rms(Component::Vx),
                rms(Component::Vy),
                rms(Component::Vz),
                st.mean_rms,
                opt(st.mean_relative, 4)
            );
        }
        let _ = writeln!(s, "network mean relative error: {}", opt(self.network_mean_relative, 4));
        s
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn sample_interval(f: &TraceFile) -> Result<f64> {
    f.header
        .dt
        .or_else(|| (f.times.len() >= 2).then(|| f.times[1] - f.times[0]))
        .filter(|dt| *dt > 0.0)
        .ok_or_else(|| Error::Metric(format!("{} {}: cannot tell the sample interval", f.header.station, f.header.component)))
}

/// `(time, sim, ref)` on the simulation's samples where the reference overlaps.
fn align(sim: &TraceFile, reference: &TraceFile) -> Vec<(f64, f64, f64)> {
    let origin = sim.header.start_time.unwrap_or(chrono::DateTime::UNIX_EPOCH);
    let st = sim.times_since(origin);
    let rt = reference.times_since(origin);
    st.iter()
        .zip(&sim.values)
        .filter_map(|(&t, &v)| interpolate_at(&rt, &reference.values, t).map(|r| (t, v, r)))
        .collect()
}

fn distances(sim_dir: &Path) -> BTreeMap<String, f64> {
    let manifest = sim_dir.join(MANIFEST_FILE);
    let Ok(resolved) = Scenario::load(&manifest).and_then(|s| s.resolve()) else {
        log::info!("no usable {} in {}; stations left unsorted", MANIFEST_FILE, sim_dir.display());
        return BTreeMap::new();
    };
    resolved
        .receivers
        .iter()
        .enumerate()
        .filter_map(|(n, r)| resolved.source_distance(n).ok().map(|d| (r.name.clone(), d)))
        .collect()
}

/// Band-passes both sides and reports per-station misfits.
///
/// The reference is interpolated onto the simulation's sample times by
/// absolute time. With `overlay_dir` set, writes one `time sim ref` file per
/// station and component plus `compare.toml`.
pub fn cmd_compare(
    sim_dir: &Path,
    ref_dir: &Path,
    band: (f64, f64),
    overlay_dir: Option<&Path>,
) -> Result<CompareReport> {
    let sim = read_trace_dir(sim_dir)?;
    let reference = read_trace_dir(ref_dir)?;
    let dist = distances(sim_dir);
    if let Some(dir) = overlay_dir {
        fs::create_dir_all(dir)?;
    }

    let mut stations = Vec::new();
    for (name, sim_components) in &sim {
        let Some(ref_components) = reference.get(name) else {
            continue;
        };
        let mut components = Vec::new();
        for (c, s) in sim_components {
            let Some(r) = ref_components.get(c) else {
                continue;
            };
            let rows = align(s, r);
            if rows.len() < MIN_OVERLAP {
                return Err(Error::Metric(format!(
                    "{name} {c}: only {} overlapping samples between simulation and reference",
                    rows.len()
                )));
            }
            let dt = sample_interval(s)?;
            let sv: Vec<f64> = rows.iter().map(|x| x.1).collect();
            let rv: Vec<f64> = rows.iter().map(|x| x.2).collect();
            let fs_ = bandpass(&sv, dt, band.0, band.1)?;
            let fr = bandpass(&rv, dt, band.0, band.1)?;
            if let Some(dir) = overlay_dir {
                let mut text = format!("# station: {name}\n# component: {c}\n# band_hz: {} {}\n# columns: time_s sim ref\n", band.0, band.1);
                for ((row, a), b) in rows.iter().zip(&fs_).zip(&fr) {
                    let _ = writeln!(text, "{} {a} {b}", row.0);
                }
                fs::write(dir.join(format!("overlay_{name}_{c}.txt")), text)?;
            }
            components.push(ComponentError {
                component: *c,
                samples: rows.len(),
                rms: rms_error(&fs_, &fr)?,
                relative: relative_error(&fs_, &fr).ok(),
            });
        }
        if components.is_empty() {
            continue;
        }
        stations.push(StationReport {
            station: name.clone(),
            distance_m: dist.get(name).copied(),
            mean_rms: mean(components.iter().map(|e| e.rms)).unwrap_or(0.0),
            mean_relative: mean(components.iter().filter_map(|e| e.relative)),
            components,
        });
    }
    if stations.is_empty() {
        return Err(Error::Config(format!(
            "no station traces in common between {} and {}",
            sim_dir.display(),
            ref_dir.display()
        )));
    }
    stations.sort_by(|a, b| match (a.distance_m, b.distance_m) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.station.cmp(&b.station),
    });
    let report = CompareReport {
        band_hz: [band.0, band.1],
        network_mean_relative: mean(stations.iter().filter_map(|s| s.mean_relative)),
        stations,
    };
    if let Some(dir) = overlay_dir {
        fs::write(dir.join("compare.toml"), report.to_toml()?)?;
    }
    Ok(report)
}
