//! Columnar text trace files, one per station and velocity component.
//!
//! ```text
//! # station: CHIV
//! # latitude: 19.9763
//! # longitude: -76.4147
//! # altitude_m: 20
//! # start_time: 2016-01-17T08:29:25Z
//! # dt: 0.1
//! # component: vx
//! # columns: time_s velocity_m_per_s
//! 0 0e0
//! 0.1 1.5e-12
//! ```
//!
//! Times are seconds after `start_time`, written to the nanosecond; values
//! are written in shortest round-trip scientific form. Reference recordings use the same
//! layout; any header line may be omitted, in which case station and
//! component come from the `<station>_<component>.txt` file name.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};
use crate::geometry::Component;
use crate::receiver::{Receiver, TraceSet};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub station: String,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub altitude_m: Option<f64>,
    pub start_time: Option<DateTime<Utc>>,
    pub dt: Option<f64>,
    pub component: Component,
}

/// One component of one station.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub header: TraceHeader,
    /// Seconds after the start time.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TraceFile {
    /// Sample times as seconds after `origin`; relative times are used as-is when no start time is known.
    pub fn times_since(&self, origin: DateTime<Utc>) -> Vec<f64> {
        let shift = match self.header.start_time {
            Some(start) => (start - origin).num_nanoseconds().unwrap_or(0) as f64 * 1e-9,
            None => 0.0,
        };
        self.times.iter().map(|t| t + shift).collect()
    }

    pub fn render(&self) -> String {
        let h = &self.header;
        let mut s = String::new();
        let _ = writeln!(s, "# station: {}", h.station);
        if let Some(v) = h.latitude {
            let _ = writeln!(s, "# latitude: {v}");
        }
        if let Some(v) = h.longitude {
            let _ = writeln!(s, "# longitude: {v}");
        }
        if let Some(v) = h.altitude_m {
            let _ = writeln!(s, "# altitude_m: {v}");
        }
        if let Some(v) = h.start_time {
            let _ = writeln!(s, "# start_time: {}", v.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true));
        }
        if let Some(v) = h.dt {
            let _ = writeln!(s, "# dt: {v}");
        }
        let _ = writeln!(s, "# component: {}", h.component);
        let _ = writeln!(s, "# columns: time_s velocity_m_per_s");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(s, "{} {v:e}", (t * 1e9).round() / 1e9);
        }
        s
    }

    /// Parses a trace file; `fallback` supplies station and component when the header lacks them.
    pub fn parse(text: &str, fallback: Option<(&str, Component)>) -> Result<Self> {
        let mut station = None;
        let mut component = None;
        let (mut latitude, mut longitude, mut altitude_m, mut start_time, mut dt) = (None, None, None, None, None);
        let mut times = Vec::new();
        let mut values = Vec::new();
        let num = |key: &str, v: &str| -> Result<f64> {
            v.parse()
                .map_err(|e| Error::Format(format!("trace header `{key}`: {e}")))
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let Some((key, value)) = rest.split_once(':') else {
                    continue;
                };
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "station" => station = Some(value.to_string()),
                    "latitude" => latitude = Some(num(key, value)?),
                    "longitude" => longitude = Some(num(key, value)?),
                    "altitude_m" => altitude_m = Some(num(key, value)?),
                    "dt" => dt = Some(num(key, value)?),
                    "start_time" => {
                        start_time = Some(
                            DateTime::parse_from_rfc3339(value)
                                .map_err(|e| Error::Format(format!("trace header `start_time`: {e}")))?
                                .with_timezone(&Utc),
                        )
                    }
                    "component" => component = Some(value.parse::<Component>()?),
                    _ => {}
                }
                continue;
            }
            let mut cols = line.split_whitespace();
            let (Some(t), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Format(format!(
                    "trace line {}: expected `time value`",
                    lineno + 1
                )));
            };
            let parse = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| Error::Format(format!("trace line {}: {e}", lineno + 1)))
            };
            times.push(parse(t)?);
            values.push(parse(v)?);
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Format("trace times must increase strictly".into()));
        }
        let station = station
            .or_else(|| fallback.map(|f| f.0.to_string()))
            .ok_or_else(|| Error::Format("trace has no station".into()))?;
        let component = component
            .or(fallback.map(|f| f.1))
            .ok_or_else(|| Error::Format("trace has no component".into()))?;
        if !Component::VELOCITIES.contains(&component) {
            return Err(Error::Format(format!("trace component must be a velocity, got {component}")));
        }
        Ok(TraceFile {
            header: TraceHeader {
                station,
                latitude,
                longitude,
                altitude_m,
                start_time,
                dt,
                component,
            },
            times,
            values,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let fallback = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(split_file_stem);
        Self::parse(&text, fallback)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// `"CHIV_vx"` → `("CHIV", Vx)`.
pub fn split_file_stem(stem: &str) -> Option<(&str, Component)> {
    let (station, comp) = stem.rsplit_once('_')?;
    let c = comp.parse::<Component>().ok()?;
    (Component::VELOCITIES.contains(&c) && !station.is_empty()).then_some((station, c))
}

pub fn trace_file_name(station: &str, component: Component) -> String {
    format!("{station}_{component}.txt")
}

/// Writes every receiver's three components into `dir`; returns the paths written.
pub fn write_traces(dir: &Path, traces: &TraceSet, stations: &[Receiver]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (n, name) in traces.names().iter().enumerate() {
        let station = stations.iter().find(|s| &s.name == name);
        for c in Component::VELOCITIES {
            let values = traces.row(n, c).to_vec();
            let times = (0..values.len()).map(|i| i as f64 * traces.dt()).collect();
            let file = TraceFile {
                header: TraceHeader {
                    station: name.clone(),
                    latitude: station.map(|s| s.latitude),
                    longitude: station.map(|s| s.longitude),
                    altitude_m: station.map(|s| s.altitude),
                    start_time: Some(traces.start_time()),
                    dt: Some(traces.dt()),
                    component: c,
                },
                times,
                values,
            };
            let path = dir.join(trace_file_name(name, c));
            fs::write(&path, file.render())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// All `<station>_<component>.txt` files in `dir`, keyed by station then component.
pub fn read_trace_dir(dir: &Path) -> Result<BTreeMap<String, BTreeMap<Component, TraceFile>>> {
    let mut out: BTreeMap<String, BTreeMap<Component, TraceFile>> = BTreeMap::new();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Config(format!("cannot read trace directory {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    for path in paths {
        let Some((station, c)) = path.file_stem().and_then(|s| s.to_str()).and_then(split_file_stem) else {
            continue;
        };
        let station = station.to_string();
        let file = TraceFile::read(&path)?;
        out.entry(station).or_default().insert(c, file);
    }
    Ok(out)
}
