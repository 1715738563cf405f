//! Simulation domain, geographic mapping and grid-derived limits.
//!
//! Axis convention: `x` runs along latitude (north), `y` along longitude
//! (east) and `z` along depth, increasing downward. Grid nodes are cell
//! centred, so node `i` sits at `(i + 0.5) * dx` in local meters.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Courant factor of the 4th-order staggered scheme in 3D.
pub const COURANT_FACTOR: f64 = 0.495;

/// Grid points per minimum wavelength required by the source-frequency limit.
pub const POINTS_PER_WAVELENGTH: f64 = 5.0;

fn meters_per_degree() -> f64 {
    EARTH_RADIUS_M * std::f64::consts::PI / 180.0
}

/// Latitude/longitude/depth box. Depths are kilometers, negative above sea level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeographicBounds {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub depth_min: f64,
    pub depth_max: f64,
}

impl GeographicBounds {
    pub fn new(
        lat: (f64, f64),
        lon: (f64, f64),
        depth_km: (f64, f64),
    ) -> Result<Self> {
        let b = GeographicBounds {
            lat_min: lat.0,
            lat_max: lat.1,
            lon_min: lon.0,
            lon_max: lon.1,
            depth_min: depth_km.0,
            depth_max: depth_km.1,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.lat_min,
            self.lat_max,
            self.lon_min,
            self.lon_max,
            self.depth_min,
            self.depth_max,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("geographic bounds must be finite"));
        }
        if !(self.lat_min < self.lat_max) {
            return Err(Error::domain(format!(
                "latitude range is empty: {} .. {}",
                self.lat_min, self.lat_max
            )));
        }
        if !(self.lon_min < self.lon_max) {
            return Err(Error::domain(format!(
                "longitude range is empty: {} .. {}",
                self.lon_min, self.lon_max
            )));
        }
        if !(self.depth_min < self.depth_max) {
            return Err(Error::domain(format!(
                "depth range is empty: {} .. {}",
                self.depth_min, self.depth_max
            )));
        }
        if self.lat_min < -90.0 || self.lat_max > 90.0 {
            return Err(Error::domain("latitude outside [-90, 90]"));
        }
        if self.lon_min < -180.0 || self.lon_max > 180.0 {
            return Err(Error::domain("longitude outside [-180, 180]"));
        }
        Ok(())
    }

    fn cos_mean_lat(&self) -> f64 {
        (0.5 * (self.lat_min + self.lat_max)).to_radians().cos()
    }

    /// Physical extent `[x, y, z]` in meters.
    pub fn size(&self) -> [f64; 3] {
        let m = meters_per_degree();
        [
            (self.lat_max - self.lat_min) * m,
            (self.lon_max - self.lon_min) * m * self.cos_mean_lat(),
            (self.depth_max - self.depth_min) * 1000.0,
        ]
    }

    pub fn contains(&self, lat: f64, lon: f64, depth_km: f64) -> bool {
        self.check_inside(lat, lon, depth_km).is_ok()
    }

    fn check_inside(&self, lat: f64, lon: f64, depth_km: f64) -> Result<()> {
        let axes = [
            ("latitude", lat, self.lat_min, self.lat_max),
            ("longitude", lon, self.lon_min, self.lon_max),
            ("depth", depth_km, self.depth_min, self.depth_max),
        ];
        for (name, v, lo, hi) in axes {
            if !(v >= lo && v <= hi) {
                return Err(Error::domain(format!(
                    "{name} {v} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Equirectangular projection about the mean latitude, in local meters.
pub fn geographic_to_local(
    bounds: &GeographicBounds,
    lat: f64,
    lon: f64,
    depth_km: f64,
) -> Result<[f64; 3]> {
    bounds.check_inside(lat, lon, depth_km)?;
    let m = meters_per_degree();
    Ok([
        (lat - bounds.lat_min) * m,
        (lon - bounds.lon_min) * m * bounds.cos_mean_lat(),
        (depth_km - bounds.depth_min) * 1000.0,
    ])
}

/// Inverse of [`geographic_to_local`]; returns `(lat, lon, depth_km)`.
pub fn local_to_geographic(bounds: &GeographicBounds, local: [f64; 3]) -> (f64, f64, f64) {
    let m = meters_per_degree();
    (
        bounds.lat_min + local[0] / m,
        bounds.lon_min + local[1] / (m * bounds.cos_mean_lat()),
        bounds.depth_min + local[2] / 1000.0,
    )
}

/// Regular simulation grid: node counts and spacing in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Grid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::domain(format!("grid dimensions must be positive, got {dims:?}")));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::domain(format!(
                "grid spacing must be positive and finite, got {spacing:?}"
            )));
        }
        Ok(Grid {
            nx: dims[0],
            ny: dims[1],
            nz: dims[2],
            dx: spacing[0],
            dy: spacing[1],
            dz: spacing[2],
        })
    }

    /// Cubic grid with equal spacing on every axis.
    pub fn cubic(n: usize, h: f64) -> Result<Self> {
        Grid::new([n, n, n], [h, h, h])
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn spacing(&self) -> [f64; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn size(&self) -> [f64; 3] {
        [
            self.nx as f64 * self.dx,
            self.ny as f64 * self.dy,
            self.nz as f64 * self.dz,
        ]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    pub fn min_spacing(&self) -> f64 {
        self.dx.min(self.dy).min(self.dz)
    }

    pub fn max_spacing(&self) -> f64 {
        self.dx.max(self.dy).max(self.dz)
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    /// Local meters to real-valued node coordinates.
    pub fn to_grid_coords(&self, local: [f64; 3]) -> [f64; 3] {
        [
            local[0] / self.dx - 0.5,
            local[1] / self.dy - 0.5,
            local[2] / self.dz - 0.5,
        ]
    }

    pub fn to_local(&self, p: [f64; 3]) -> [f64; 3] {
        [
            (p[0] + 0.5) * self.dx,
            (p[1] + 0.5) * self.dy,
            (p[2] + 0.5) * self.dz,
        ]
    }
}

/// Geographic box discretised on a grid with a fixed time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationDomain {
    pub bounds: GeographicBounds,
    pub grid: Grid,
    pub dt: f64,
    pub n_steps: usize,
    pub start_time: DateTime<Utc>,
}

impl SimulationDomain {
    pub fn new(
        bounds: GeographicBounds,
        dims: [usize; 3],
        dt: f64,
        n_steps: usize,
        start_time: DateTime<Utc>,
    ) -> Result<Self> {
        bounds.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("time step must be positive, got {dt}")));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::domain(format!("grid dimensions must be positive, got {dims:?}")));
        }
        let size = bounds.size();
        let spacing = [
            size[0] / dims[0] as f64,
            size[1] / dims[1] as f64,
            size[2] / dims[2] as f64,
        ];
        Ok(SimulationDomain {
            bounds,
            grid: Grid::new(dims, spacing)?,
            dt,
            n_steps,
            start_time,
        })
    }

    pub fn size(&self) -> [f64; 3] {
        self.grid.size()
    }

    /// Real-valued grid coordinates of a geographic point.
    pub fn grid_position(&self, lat: f64, lon: f64, depth_km: f64) -> Result<[f64; 3]> {
        let local = geographic_to_local(&self.bounds, lat, lon, depth_km)?;
        Ok(self.grid.to_grid_coords(local))
    }

    pub fn duration(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// Largest stable time step for a medium whose fastest wave travels at `vel_max`.
    pub fn dt_max(&self, vel_max: f64) -> Result<f64> {
        max_time_step(self.grid.min_spacing(), vel_max)
    }

    pub fn max_frequency(&self, vel_min: f64) -> Result<f64> {
        max_source_frequency(self.grid.max_spacing(), vel_min)
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

/// `0.495 * dx_min / vel_max`.
pub fn max_time_step(dx_min: f64, vel_max: f64) -> Result<f64> {
    require_positive("dx_min", dx_min)?;
    require_positive("vel_max", vel_max)?;
    Ok(COURANT_FACTOR * dx_min / vel_max)
}

/// `vel_min / (5 * dx_max)`.
pub fn max_source_frequency(dx_max: f64, vel_min: f64) -> Result<f64> {
    require_positive("dx_max", dx_max)?;
    require_positive("vel_min", vel_min)?;
    Ok(vel_min / (POINTS_PER_WAVELENGTH * dx_max))
}

/// The nine staggered wavefield components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Vx,
    Vy,
    Vz,
    Sxx,
    Syy,
    Szz,
    Sxy,
    Sxz,
    Syz,
}

impl Component {
    pub const ALL: [Component; 9] = [
        Component::Vx,
        Component::Vy,
        Component::Vz,
        Component::Sxx,
        Component::Syy,
        Component::Szz,
        Component::Sxy,
        Component::Sxz,
        Component::Syz,
    ];

    pub const VELOCITIES: [Component; 3] = [Component::Vx, Component::Vy, Component::Vz];

    pub const STRESSES: [Component; 6] = [
        Component::Sxx,
        Component::Syy,
        Component::Szz,
        Component::Sxy,
        Component::Sxz,
        Component::Syz,
    ];

    /// Half-cell offset of this component relative to its node index.
    pub fn offset(self) -> [f64; 3] {
        match self {
            Component::Sxx | Component::Syy | Component::Szz => [0.0, 0.0, 0.0],
            Component::Sxy => [0.5, 0.5, 0.0],
            Component::Sxz => [0.5, 0.0, 0.5],
            Component::Syz => [0.0, 0.5, 0.5],
            Component::Vx => [0.5, 0.0, 0.0],
            Component::Vy => [0.0, 0.5, 0.0],
            Component::Vz => [0.0, 0.0, 0.5],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::Vx => "vx",
            Component::Vy => "vy",
            Component::Vz => "vz",
            Component::Sxx => "sxx",
            Component::Syy => "syy",
            Component::Szz => "szz",
            Component::Sxy => "sxy",
            Component::Sxz => "sxz",
            Component::Syz => "syz",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Component::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown field component `{s}`")))
    }
}

/// Grid-unit position of node `(i, j, k)` of `component`.
pub fn staggered_position(component: Component, i: usize, j: usize, k: usize) -> [f64; 3] {
    let o = component.offset();
    [i as f64 + o[0], j as f64 + o[1], k as f64 + o[2]]
}

/// One row of the bundled level-of-detail table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelOfDetail {
    pub level: u8,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub n_steps: usize,
    pub dt: f64,
    /// Nominal grid spacing, km.
    pub tabulated_spacing_km: [f64; 3],
    /// Nominal maximum source frequency, Hz.
    pub tabulated_max_frequency_hz: f64,
}

const fn lod(
    level: u8,
    dims: [usize; 3],
    n_steps: usize,
    spacing: [f64; 3],
    dt: f64,
    f_max: f64,
) -> LevelOfDetail {
    LevelOfDetail {
        level,
        nx: dims[0],
        ny: dims[1],
        nz: dims[2],
        n_steps,
        dt,
        tabulated_spacing_km: spacing,
        tabulated_max_frequency_hz: f_max,
    }
}

pub const LEVELS: [LevelOfDetail; 11] = [
    lod(0, [64, 64, 32], 1700, [6.67, 10.61, 3.75], 0.1, 0.037),
    lod(1, [64, 64, 64], 1700, [6.67, 10.61, 1.87], 0.1, 0.037),
    lod(2, [128, 64, 64], 1700, [3.33, 10.61, 1.87], 0.1, 0.037),
    lod(3, [128, 128, 64], 1700, [3.33, 5.30, 1.87], 0.1, 0.075),
    lod(4, [128, 128, 128], 3400, [3.33, 5.30, 0.93], 0.05, 0.075),
    lod(5, [256, 128, 128], 3400, [1.66, 5.30, 0.93], 0.05, 0.075),
    lod(6, [256, 256, 128], 3400, [1.66, 2.65, 0.93], 0.05, 0.15),
    lod(7, [256, 256, 256], 17000, [1.66, 2.65, 0.46], 0.01, 0.15),
    lod(8, [512, 256, 256], 17000, [0.83, 2.65, 0.46], 0.01, 0.15),
    lod(9, [512, 512, 256], 17000, [0.83, 1.32, 0.46], 0.01, 0.30),
    lod(10, [512, 512, 512], 17000, [0.83, 1.32, 0.23], 0.01, 0.30),
];

impl LevelOfDetail {
    pub fn preset(level: u8) -> Result<&'static LevelOfDetail> {
        LEVELS
            .iter()
            .find(|l| l.level == level)
            .ok_or_else(|| Error::domain(format!("no level-of-detail preset {level} (0..=10)")))
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cuba() -> GeographicBounds {
        GeographicBounds::new((17.78, 21.63), (-78.27, -71.86), (-30.0, 90.0)).unwrap()
    }

    #[test]
    fn lower_corner_maps_to_origin() {
        let b = cuba();
        let p = geographic_to_local(&b, 17.78, -78.27, -30.0).unwrap();
        assert_eq!(p, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn latitude_extent_close_to_tabulated_size() {
        let b = cuba();
        let p = geographic_to_local(&b, 21.63, -78.27, -30.0).unwrap();
        assert_relative_eq!(p[0], 428_100.0, max_relative = 1e-3);
        assert!((p[0] - 427_030.0).abs() / 427_030.0 < 0.02);
        assert_relative_eq!(b.size()[2], 120_000.0);
    }

    #[test]
    fn midpoint_latitude_is_half_size() {
        let b = cuba();
        let mid = 0.5 * (b.lat_min + b.lat_max);
        let p = geographic_to_local(&b, mid, b.lon_min, b.depth_min).unwrap();
        assert_relative_eq!(p[0], b.size()[0] / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn out_of_bounds_names_axis() {
        let b = cuba();
        let err = geographic_to_local(&b, 19.0, -70.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("longitude"), "{err}");
        let err = geographic_to_local(&b, 19.0, -75.0, 95.0).unwrap_err();
        assert!(err.to_string().contains("depth"), "{err}");
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(GeographicBounds::new((10.0, 5.0), (0.0, 1.0), (0.0, 1.0)).is_err());
        assert!(GeographicBounds::new((0.0, 91.0), (0.0, 1.0), (0.0, 1.0)).is_err());
        assert!(GeographicBounds::new((0.0, 1.0), (0.0, 1.0), (2.0, 2.0)).is_err());
    }

    #[test]
    fn time_step_limit() {
        assert_relative_eq!(max_time_step(3750.0, 8000.0).unwrap(), 0.23203125, max_relative = 1e-12);
        assert_relative_eq!(max_time_step(1.0, 0.495).unwrap(), 1.0, max_relative = 1e-15);
        assert!(max_time_step(0.0, 1.0).is_err());
        assert!(max_time_step(1.0, -2.0).is_err());
    }

    #[test]
    fn frequency_limit() {
        assert_relative_eq!(max_source_frequency(5.0, 25.0).unwrap(), 1.0);
        assert_relative_eq!(max_source_frequency(10_610.0, 2816.0).unwrap(), 0.053082, max_relative = 1e-4);
        // the tabulated 0.037 Hz corresponds to a ~1.96 km/s minimum velocity
        let f = max_source_frequency(10_610.0, 1963.0).unwrap();
        assert!((f - 0.037).abs() < 0.0005, "{f}");
        assert!(max_source_frequency(-1.0, 1.0).is_err());
    }

    #[test]
    fn staggered_offsets() {
        assert_eq!(staggered_position(Component::Sxx, 3, 4, 5), [3.0, 4.0, 5.0]);
        assert_eq!(staggered_position(Component::Vx, 0, 0, 0), [0.5, 0.0, 0.0]);
        assert_eq!(staggered_position(Component::Syz, 1, 1, 1), [1.0, 1.5, 1.5]);
        assert_eq!(staggered_position(Component::Sxy, 0, 0, 0), [0.5, 0.5, 0.0]);
        assert_eq!(staggered_position(Component::Vz, 0, 0, 0), [0.0, 0.0, 0.5]);
        assert!("sxw".parse::<Component>().is_err());
        assert_eq!("syz".parse::<Component>().unwrap(), Component::Syz);
    }

    #[test]
    fn level_table_matches_reference_rows() {
        assert_eq!(LEVELS.len(), 11);
        let l0 = LevelOfDetail::preset(0).unwrap();
        assert_eq!((l0.dims(), l0.n_steps, l0.dt), ([64, 64, 32], 1700, 0.1));
        let l10 = LevelOfDetail::preset(10).unwrap();
        assert_eq!((l10.dims(), l10.n_steps, l10.dt), ([512, 512, 512], 17000, 0.01));
        assert!(LevelOfDetail::preset(11).is_err());
        for w in LEVELS.windows(2) {
            assert!(w[1].cells() >= w[0].cells());
        }
    }

    #[test]
    fn presets_respect_time_step_limit() {
        // Fastest layer of the bundled model travels at 8 km/s.
        let b = cuba();
        let t0 = chrono::DateTime::UNIX_EPOCH;
        for l in &LEVELS {
            let d = SimulationDomain::new(b, l.dims(), l.dt, l.n_steps, t0).unwrap();
            assert!(l.dt <= d.dt_max(8000.0).unwrap(), "level {}", l.level);
        }
    }
}
