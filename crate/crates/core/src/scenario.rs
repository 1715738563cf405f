//! Scenario files: TOML descriptions of a complete run, and their resolution
//! into a validated, fully explicit configuration.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeographicBounds, LevelOfDetail, SimulationDomain};
use crate::medium::{build_parameter_volume, default_parameter_dims, Layer, LayeredModel, ParameterVolume};
use crate::receiver::{Receiver, ReceiverPoint};
use crate::solver::{BackendKind, SimulationSetup, SolverOptions, SpongeProfile};
use crate::source::{MomentTensor, MomentTensorSource, PointSource, SourceTimeFunction, StfKind};

const CUBA_2016: &str = include_str!("../presets/cuba-2016.toml");

/// Base name of the bundled scenario family; `cuba-2016-level-N` selects a level.
pub const CUBA_PRESET: &str = "cuba-2016";

/// Names accepted by [`Scenario::preset`].
pub fn preset_names() -> Vec<String> {
    std::iter::once(CUBA_PRESET.to_string())
        .chain((0..=10).map(|l| format!("{CUBA_PRESET}-level-{l}")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Degrees `[min, max]`.
    pub latitude: [f64; 2],
    pub longitude: [f64; 2],
    /// Kilometers `[min, max]`, negative above sea level.
    pub depth_km: [f64; 2],
    /// Level-of-detail preset supplying grid, dt and step count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    /// Inline layers (km, km/s, g/cm³).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<Layer>>,
    /// Layer table file, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface_depth_km: Option<f64>,
    /// Parameter-volume sample counts; a quarter of the simulation grid by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter_grid: Option<[usize; 3]>,
    /// Pre-sample the medium at every staggered node (more memory, faster steps).
    #[serde(default)]
    pub cache: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StfConfig {
    #[serde(default)]
    pub kind: StfKind,
    /// Half the grid's maximum source frequency by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_frequency_hz: Option<f64>,
    /// Wavelet centre after the start time; the centroid offset, else `1.5 / f_p`, by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_s: Option<f64>,
}

fn default_sign() -> f64 {
    -1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub latitude: f64,
    pub longitude: f64,
    pub depth_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid_time: Option<DateTime<Utc>>,
    /// N·m, x = north, y = east, z = down.
    pub moment: MomentTensor,
    #[serde(default)]
    pub stf: StfConfig,
    #[serde(default = "default_sign")]
    pub injection_sign: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverConfig {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub altitude_m: f64,
    /// Recording depth; half a vertical cell below the free surface by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_km: Option<f64>,
}

fn default_check_interval() -> usize {
    10
}

fn default_band() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_check_interval")]
    pub divergence_check_interval: usize,
    #[serde(default = "default_band")]
    pub near_surface_band: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            divergence_check_interval: default_check_interval(),
            near_surface_band: default_band(),
        }
    }
}

/// Run facts appended to a manifest; ignored when the manifest is loaded back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub version: String,
    pub dt_max_s: f64,
    pub max_frequency_hz: f64,
    pub steps_completed: usize,
    pub diverged: bool,
    pub setup_wall_s: f64,
    pub steps_wall_s: f64,
    pub mean_step_wall_s: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub start_time: DateTime<Utc>,
    #[serde(default)]
    pub backend: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Reject instead of warn when the wavelet exceeds the grid's frequency limit.
    #[serde(default)]
    pub strict_frequency: bool,
    pub domain: DomainConfig,
    pub medium: MediumConfig,
    pub source: SourceConfig,
    #[serde(default)]
    pub receivers: Vec<ReceiverConfig>,
    #[serde(default)]
    pub sponge: SpongeProfile,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunInfo>,
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScenario {
    pub name: String,
    pub backend: BackendKind,
    pub output_dir: Option<PathBuf>,
    pub strict_frequency: bool,
    pub level: Option<u8>,
    pub domain: SimulationDomain,
    pub model: LayeredModel,
    pub parameter_dims: [usize; 3],
    pub cache_medium: bool,
    pub source: MomentTensorSource,
    pub injection_sign: f64,
    pub receivers: Vec<Receiver>,
    /// Recording depth per receiver, km.
    pub receiver_depths: Vec<f64>,
    pub sponge: SpongeProfile,
    pub solver: SolverConfig,
    pub dt_max: f64,
    pub max_frequency: f64,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("scenario: {}", e.to_string().trim_end())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        let mut s = Self::parse(&text)?;
        if let (Some(file), Some(dir)) = (&s.medium.file, path.parent()) {
            if file.is_relative() {
                s.medium.file = Some(dir.join(file));
            }
        }
        Ok(s)
    }

    /// Bundled scenario by name, see [`preset_names`].
    pub fn preset(name: &str) -> Result<Self> {
        let mut s = Self::parse(CUBA_2016)?;
        if name == CUBA_PRESET {
            return Ok(s);
        }
        let level = name
            .strip_prefix(CUBA_PRESET)
            .and_then(|r| r.strip_prefix("-level-"))
            .and_then(|l| l.parse::<u8>().ok())
            .filter(|&l| l <= 10)
            .ok_or_else(|| {
                Error::Config(format!("unknown preset `{name}`; available: {}", preset_names().join(", ")))
            })?;
        s.domain.level = Some(level);
        s.name = name.to_string();
        Ok(s)
    }

    /// A path to a scenario file, or a preset name.
    pub fn from_arg(arg: &str) -> Result<Self> {
        let path = Path::new(arg);
        if path.exists() {
            Self::load(path)
        } else if preset_names().iter().any(|n| n == arg) {
            Self::preset(arg)
        } else {
            Err(Error::Config(format!(
                "scenario `{arg}` is neither a file nor a preset ({})",
                preset_names().join(", ")
            )))
        }
    }

    /// Switches to a level-of-detail preset, dropping any explicit grid, dt and step count.
    pub fn set_level(&mut self, level: u8) {
        self.domain.level = Some(level);
        self.domain.grid = None;
        self.domain.dt = None;
        self.domain.n_steps = None;
        self.medium.parameter_grid = None;
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize scenario: {e}")))
    }

    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let mut warnings = Vec::new();
        let d = &self.domain;
        let bounds = GeographicBounds::new(
            (d.latitude[0], d.latitude[1]),
            (d.longitude[0], d.longitude[1]),
            (d.depth_km[0], d.depth_km[1]),
        )
        .map_err(|e| Error::Config(format!("domain: {e}")))?;
        let lod = d
            .level
            .map(LevelOfDetail::preset)
            .transpose()
            .map_err(|e| Error::Config(format!("domain.level: {e}")))?;
        let dims = d
            .grid
            .or(lod.map(|l| l.dims()))
            .ok_or_else(|| Error::config("domain.grid: required when domain.level is not set"))?;
        let dt = d
            .dt
            .or(lod.map(|l| l.dt))
            .ok_or_else(|| Error::config("domain.dt: required when domain.level is not set"))?;
        let n_steps = d
            .n_steps
            .or(lod.map(|l| l.n_steps))
            .ok_or_else(|| Error::config("domain.n_steps: required when domain.level is not set"))?;
        let domain = SimulationDomain::new(bounds, dims, dt, n_steps, self.start_time)
            .map_err(|e| Error::Config(format!("domain: {e}")))?;

        let model = self.model()?;
        let dt_max = domain.dt_max(model.vp_max())?;
        if dt > dt_max {
            return Err(Error::Config(format!(
                "domain.dt: {dt} s exceeds the stability limit {dt_max:.6} s for this grid and vp_max {} m/s",
                model.vp_max()
            )));
        }
        let max_frequency = domain.max_frequency(model.vel_min())?;

        let parameter_dims = self.medium.parameter_grid.unwrap_or(default_parameter_dims(dims));
        if parameter_dims.iter().any(|&n| n < 2) {
            return Err(Error::config(format!(
                "medium.parameter_grid: needs at least 2 samples per axis, got {parameter_dims:?}"
            )));
        }

        let src = &self.source;
        let fp = src.stf.peak_frequency_hz.unwrap_or(0.5 * max_frequency);
        if !(fp > 0.0 && fp.is_finite()) {
            return Err(Error::config(format!("source.stf.peak_frequency_hz: must be positive, got {fp}")));
        }
        if fp > max_frequency {
            let msg = format!(
                "source.stf.peak_frequency_hz: {fp} Hz exceeds the grid limit {max_frequency:.4} Hz"
            );
            if self.strict_frequency {
                return Err(Error::Config(msg));
            }
            warnings.push(msg);
        }
        let delay = match (src.stf.delay_s, src.centroid_time) {
            (Some(d), _) => d,
            (None, Some(c)) => (c - self.start_time).num_nanoseconds().unwrap_or(0) as f64 * 1e-9,
            (None, None) => 1.5 / fp,
        };
        let stf = SourceTimeFunction {
            kind: src.stf.kind,
            peak_frequency: fp,
            delay,
        };
        if stf.evaluate(0.0).abs() > 1e-3 {
            warnings.push(format!(
                "source wavelet is truncated at the start (delay {delay} s, f_p {fp} Hz)"
            ));
        }
        if !(src.injection_sign == 1.0 || src.injection_sign == -1.0) {
            return Err(Error::config("source.injection_sign: must be 1 or -1"));
        }
        let source = MomentTensorSource {
            moment: src.moment,
            location: (src.latitude, src.longitude, src.depth_km),
            centroid_time: src.centroid_time,
            stf,
        };
        source
            .to_point(&domain, src.injection_sign)
            .map_err(|e| Error::Config(format!("source: {e}")))?;

        let default_depth = model.surface_depth().max(bounds.depth_min) + 0.5 * domain.grid.dz / 1000.0;
        let mut receivers = Vec::new();
        let mut receiver_depths = Vec::new();
        for r in &self.receivers {
            if receivers.iter().any(|x: &Receiver| x.name == r.name) {
                return Err(Error::Config(format!("receivers: duplicate station `{}`", r.name)));
            }
            let rec = Receiver {
                name: r.name.clone(),
                latitude: r.latitude,
                longitude: r.longitude,
                altitude: r.altitude_m,
            };
            let depth = r.depth_km.unwrap_or(default_depth);
            let p = rec
                .to_point(&domain, depth)
                .map_err(|e| Error::Config(format!("receivers: {e}")))?;
            if self.sponge.contains(&domain.grid, p.position) {
                warnings.push(format!("receiver {} lies inside the sponge layer", r.name));
            }
            receivers.push(rec);
            receiver_depths.push(depth);
        }
        if self.solver.near_surface_band < 0.0 {
            return Err(Error::config("solver.near_surface_band: must be non-negative"));
        }

        Ok(ResolvedScenario {
            name: self.name.clone(),
            backend: self.backend,
            output_dir: self.output_dir.clone(),
            strict_frequency: self.strict_frequency,
            level: d.level,
            domain,
            model,
            parameter_dims,
            cache_medium: self.medium.cache,
            source,
            injection_sign: src.injection_sign,
            receivers,
            receiver_depths,
            sponge: self.sponge,
            solver: self.solver.clone(),
            dt_max,
            max_frequency,
            warnings,
        })
    }

    fn model(&self) -> Result<LayeredModel> {
        let m = &self.medium;
        let layers = match (&m.layers, &m.file) {
            (Some(l), None) => l.clone(),
            (None, Some(f)) => LayeredModel::read_table(f)
                .map_err(|e| Error::Config(format!("medium.file {}: {e}", f.display())))?
                .layers()
                .to_vec(),
            (Some(_), Some(_)) => return Err(Error::config("medium: give either layers or file, not both")),
            (None, None) => return Err(Error::config("medium: layers or file is required")),
        };
        let model = match m.surface_depth_km {
            Some(s) => LayeredModel::with_surface(layers, s),
            None => LayeredModel::new(layers),
        };
        model.map_err(|e| Error::Config(format!("medium: {e}")))
    }
}

impl ResolvedScenario {
    pub fn grid_dims(&self) -> [usize; 3] {
        self.domain.grid.dims()
    }

    pub fn parameter_volume(&self) -> Result<ParameterVolume<f64>> {
        build_parameter_volume(&self.model, &self.domain, self.parameter_dims)
    }

    pub fn receiver_points(&self) -> Result<Vec<ReceiverPoint>> {
        self.receivers
            .iter()
            .zip(&self.receiver_depths)
            .map(|(r, &d)| r.to_point(&self.domain, d))
            .collect()
    }

    pub fn point_source(&self) -> Result<PointSource> {
        self.source.to_point(&self.domain, self.injection_sign)
    }

    /// Solver inputs; fails on a GPU backend.
    pub fn setup(&self) -> Result<SimulationSetup<f64>> {
        let backend = self.backend.cpu()?;
        Ok(SimulationSetup {
            grid: self.domain.grid,
            dt: self.domain.dt,
            n_steps: self.domain.n_steps,
            medium: self.parameter_volume()?,
            sponge: self.sponge,
            options: SolverOptions {
                backend,
                cache_medium: self.cache_medium,
                divergence_check_interval: self.solver.divergence_check_interval,
                near_surface_band: self.solver.near_surface_band,
            },
            sources: vec![self.point_source()?],
            receivers: self.receiver_points()?,
        })
    }

    /// The same configuration with every default written out.
    pub fn to_explicit(&self) -> Scenario {
        let b = &self.domain.bounds;
        let stf = &self.source.stf;
        let (lat, lon, depth) = self.source.location;
        Scenario {
            name: self.name.clone(),
            start_time: self.domain.start_time,
            backend: self.backend,
            output_dir: self.output_dir.clone(),
            strict_frequency: self.strict_frequency,
            domain: DomainConfig {
                latitude: [b.lat_min, b.lat_max],
                longitude: [b.lon_min, b.lon_max],
                depth_km: [b.depth_min, b.depth_max],
                level: self.level,
                grid: Some(self.domain.grid.dims()),
                dt: Some(self.domain.dt),
                n_steps: Some(self.domain.n_steps),
            },
            medium: MediumConfig {
                layers: Some(self.model.layers().to_vec()),
                file: None,
                surface_depth_km: Some(self.model.surface_depth()),
                parameter_grid: Some(self.parameter_dims),
                cache: self.cache_medium,
            },
            source: SourceConfig {
                latitude: lat,
                longitude: lon,
                depth_km: depth,
                centroid_time: self.source.centroid_time,
                moment: self.source.moment,
                stf: StfConfig {
                    kind: stf.kind,
                    peak_frequency_hz: Some(stf.peak_frequency),
                    delay_s: Some(stf.delay),
                },
                injection_sign: self.injection_sign,
            },
            receivers: self
                .receivers
                .iter()
                .zip(&self.receiver_depths)
                .map(|(r, &d)| ReceiverConfig {
                    name: r.name.clone(),
                    latitude: r.latitude,
                    longitude: r.longitude,
                    altitude_m: r.altitude,
                    depth_km: Some(d),
                })
                .collect(),
            sponge: self.sponge,
            solver: self.solver.clone(),
            run: None,
        }
    }

    /// Epicentral-plus-depth distance from the source to a receiver, meters.
    pub fn source_distance(&self, receiver: usize) -> Result<f64> {
        let (lat, lon, depth) = self.source.location;
        let s = crate::geometry::geographic_to_local(&self.domain.bounds, lat, lon, depth)?;
        let r = &self.receivers[receiver];
        let p = crate::geometry::geographic_to_local(
            &self.domain.bounds,
            r.latitude,
            r.longitude,
            self.receiver_depths[receiver],
        )?;
        Ok(((s[0] - p[0]).powi(2) + (s[1] - p[1]).powi(2) + (s[2] - p[2]).powi(2)).sqrt())
    }
}
