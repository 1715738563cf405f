//! Layered velocity models and the density/Lamé parameter volumes sampled by the solver.
//!
//! Parameter volumes are usually much coarser than the simulation grid. Both
//! grids cover the same physical box with cell-centred nodes, so a simulation
//! coordinate `p` maps to `(p + 0.5) * n_param / n_sim - 0.5` on each axis and
//! the solver reads parameters through trilinear interpolation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{axis_weight, trilinear_with, AxisWeight, Field3};
use crate::geometry::{Grid, SimulationDomain};
use crate::real::Real;

pub use crate::field::{mirrored_index, sample_trilinear};

/// Density assigned above the free surface, kg/m³.
pub const VACUUM_DENSITY: f64 = 1.0;

/// Densities strictly below this value are treated as vacuum, kg/m³.
pub const VACUUM_THRESHOLD: f64 = 10.0;

/// One layer of a 1D model in the units of published velocity tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Depth of the layer top, km.
    pub top_depth: f64,
    /// P-wave speed, km/s.
    pub vp: f64,
    /// S-wave speed, km/s.
    pub vs: f64,
    /// Density, g/cm³.
    pub rho: f64,
}

impl Layer {
    pub fn vp_si(&self) -> f64 {
        self.vp * 1000.0
    }

    pub fn vs_si(&self) -> f64 {
        self.vs * 1000.0
    }

    pub fn rho_si(&self) -> f64 {
        self.rho * 1000.0
    }

    /// `(rho, lambda, mu)` in kg/m³ and Pa.
    pub fn si_parameters(&self) -> Result<(f64, f64, f64)> {
        let rho = self.rho_si();
        let (lambda, mu) = lame_from_velocities(self.vp_si(), self.vs_si(), rho)?;
        Ok((rho, lambda, mu))
    }
}

/// Ordered stack of layers; the free surface sits at `surface_depth` km.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredModel {
    layers: Vec<Layer>,
    surface_depth: f64,
}

impl LayeredModel {
    /// Surface defaults to the top of the first layer.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let surface = layers
            .first()
            .map(|l| l.top_depth)
            .ok_or_else(|| Error::Model("layer list is empty".into()))?;
        Self::with_surface(layers, surface)
    }

    pub fn with_surface(layers: Vec<Layer>, surface_depth: f64) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::Model("layer list is empty".into()))?;
        if !surface_depth.is_finite() || first.top_depth > surface_depth {
            return Err(Error::Model(format!(
                "first layer top {} km lies below the surface at {} km",
                first.top_depth, surface_depth
            )));
        }
        for (n, pair) in layers.windows(2).enumerate() {
            if !(pair[1].top_depth > pair[0].top_depth) {
                return Err(Error::Model(format!(
                    "layer {} top {} km is not below layer {} top {} km",
                    n + 1,
                    pair[1].top_depth,
                    n,
                    pair[0].top_depth
                )));
            }
        }
        for (n, l) in layers.iter().enumerate() {
            let finite = [l.top_depth, l.vp, l.vs, l.rho].iter().all(|v| v.is_finite());
            if !finite || !(l.rho > 0.0) || l.vs < 0.0 || !(l.vp > l.vs) {
                return Err(Error::Model(format!(
                    "layer {n} needs vp > vs >= 0 and rho > 0 (vp {}, vs {}, rho {})",
                    l.vp, l.vs, l.rho
                )));
            }
            l.si_parameters()
                .map_err(|e| Error::Model(format!("layer {n}: {e}")))?;
        }
        Ok(LayeredModel {
            layers,
            surface_depth,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn surface_depth(&self) -> f64 {
        self.surface_depth
    }

    /// Deepest layer whose top lies at or above `depth_km`.
    ///
    /// Depths above the first top return the first layer.
    pub fn layer_at(&self, depth_km: f64) -> &Layer {
        self.layers
            .iter()
            .rev()
            .find(|l| l.top_depth <= depth_km)
            .unwrap_or(&self.layers[0])
    }

    /// Fastest P speed, m/s.
    pub fn vp_max(&self) -> f64 {
        self.layers.iter().map(Layer::vp_si).fold(0.0, f64::max)
    }

    /// Slowest propagating speed (S, or P in fluid layers), m/s.
    pub fn vel_min(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| if l.vs > 0.0 { l.vs_si() } else { l.vp_si() })
            .fold(f64::INFINITY, f64::min)
    }

    /// Parses whitespace-separated `top_depth vp vs rho` rows; `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut layers = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("model line {}: {e}", lineno + 1)))?;
            if cols.len() != 4 {
                return Err(Error::Format(format!(
                    "model line {}: expected 4 columns (top_depth vp vs rho), got {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            layers.push(Layer {
                top_depth: cols[0],
                vp: cols[1],
                vs: cols[2],
                rho: cols[3],
            });
        }
        LayeredModel::new(layers)
    }

    pub fn read_table(path: &Path) -> Result<Self> {
        Self::parse_table(&std::fs::read_to_string(path)?)
    }
}

/// Isotropic Lamé parameters from wave speeds: `mu = rho vs²`, `lambda = rho vp² - 2 mu`.
pub fn lame_from_velocities(vp: f64, vs: f64, rho: f64) -> Result<(f64, f64)> {
    let mu = rho * vs * vs;
    let lambda = rho * vp * vp - 2.0 * mu;
    if lambda < 0.0 {
        return Err(Error::Model(format!(
            "negative lambda {lambda:e} Pa (vp {vp} m/s, vs {vs} m/s): need vp^2 >= 2 vs^2"
        )));
    }
    Ok((lambda, mu))
}

pub fn is_vacuum(rho: f64) -> bool {
    rho < VACUUM_THRESHOLD
}

/// Density and Lamé parameters sampled at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSample<T> {
    pub rho: T,
    pub lambda: T,
    pub mu: T,
}

/// Density (kg/m³) and Lamé parameters (Pa) on a grid independent of the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVolume<T = f64> {
    pub rho: Field3<T>,
    pub lambda: Field3<T>,
    pub mu: Field3<T>,
    /// Free-surface depth in local meters, when the surface lies inside the box.
    pub surface_z: Option<f64>,
}

impl<T: Real> ParameterVolume<T> {
    pub fn new(rho: Field3<T>, lambda: Field3<T>, mu: Field3<T>, surface_z: Option<f64>) -> Result<Self> {
        let dims = rho.dims();
        if lambda.dims() != dims || mu.dims() != dims {
            return Err(Error::domain("parameter fields must share dimensions"));
        }
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::domain(format!(
                "parameter volume needs at least 2 samples per axis, got {dims:?}"
            )));
        }
        Ok(ParameterVolume {
            rho,
            lambda,
            mu,
            surface_z,
        })
    }

    /// Constant medium from SI wave speeds and density, no free surface.
    pub fn homogeneous(dims: [usize; 3], vp: f64, vs: f64, rho: f64) -> Result<Self> {
        let (lambda, mu) = lame_from_velocities(vp, vs, rho)?;
        Self::new(
            Field3::filled(dims, T::lit(rho)),
            Field3::filled(dims, T::lit(lambda)),
            Field3::filled(dims, T::lit(mu)),
            None,
        )
    }

    pub fn dims(&self) -> [usize; 3] {
        self.rho.dims()
    }

    pub fn cast<U: Real>(&self) -> ParameterVolume<U> {
        ParameterVolume {
            rho: self.rho.cast(),
            lambda: self.lambda.cast(),
            mu: self.mu.cast(),
            surface_z: self.surface_z,
        }
    }

    pub(crate) fn weights(&self, sim: &Grid, p: [f64; 3]) -> [AxisWeight<T>; 3] {
        let d = self.dims();
        let s = sim.dims();
        [
            axis_weight(to_param_coord(p[0], s[0], d[0]), d[0]),
            axis_weight(to_param_coord(p[1], s[1], d[1]), d[1]),
            axis_weight(to_param_coord(p[2], s[2], d[2]), d[2]),
        ]
    }

    /// `(rho, lambda, mu)` at real-valued simulation-grid coordinates `p`.
    pub fn sample(&self, sim: &Grid, p: [f64; 3]) -> MediumSample<T> {
        let [wx, wy, wz] = self.weights(sim, p);
        MediumSample {
            rho: trilinear_with(&self.rho, wx, wy, wz),
            lambda: trilinear_with(&self.lambda, wx, wy, wz),
            mu: trilinear_with(&self.mu, wx, wy, wz),
        }
    }

    /// Largest and smallest propagation speeds over non-vacuum samples, m/s.
    pub fn velocity_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for ((r, l), m) in self
            .rho
            .as_slice()
            .iter()
            .zip(self.lambda.as_slice())
            .zip(self.mu.as_slice())
        {
            let (r, l, m) = (r.to_f64_lossy(), l.to_f64_lossy(), m.to_f64_lossy());
            if is_vacuum(r) {
                continue;
            }
            let vp = ((l + 2.0 * m) / r).sqrt();
            let vs = (m / r).sqrt();
            let slow = if vs > 0.0 { vs } else { vp };
            range = Some(match range {
                None => (vp, slow),
                Some((hi, lo)) => (hi.max(vp), lo.min(slow)),
            });
        }
        range
    }
}

/// Free function form of [`ParameterVolume::sample`].
pub fn sample_medium<T: Real>(volume: &ParameterVolume<T>, sim: &Grid, p: [f64; 3]) -> MediumSample<T> {
    volume.sample(sim, p)
}

#[inline]
pub(crate) fn to_param_coord(p: f64, n_sim: usize, n_param: usize) -> f64 {
    if n_sim == n_param {
        p
    } else {
        (p + 0.5) * (n_param as f64 / n_sim as f64) - 0.5
    }
}

/// Default parameter grid: a quarter of the simulation grid per axis, at least 2.
pub fn default_parameter_dims(sim: [usize; 3]) -> [usize; 3] {
    sim.map(|n| (n / 4).max(2))
}

/// Rasterises a layered model onto a parameter grid covering `domain`.
///
/// Each cell takes the layer containing its centre depth; cells above the
/// free surface receive vacuum values.
pub fn build_parameter_volume(
    model: &LayeredModel,
    domain: &SimulationDomain,
    dims: [usize; 3],
) -> Result<ParameterVolume<f64>> {
    if dims.iter().any(|&n| n < 2) {
        return Err(Error::domain(format!(
            "parameter volume needs at least 2 samples per axis, got {dims:?}"
        )));
    }
    let depth_min = domain.bounds.depth_min;
    let dz_param = domain.size()[2] / dims[2] as f64;
    let mut column = Vec::with_capacity(dims[2]);
    for k in 0..dims[2] {
        let depth = depth_min + (k as f64 + 0.5) * dz_param / 1000.0;
        let value = if depth < model.surface_depth() {
            (VACUUM_DENSITY, 0.0, 0.0)
        } else {
            model.layer_at(depth).si_parameters()?
        };
        column.push(value);
    }
    let surface_z = (model.surface_depth() - depth_min) * 1000.0;
    ParameterVolume::new(
        Field3::from_fn(dims, |_, _, k| column[k].0),
        Field3::from_fn(dims, |_, _, k| column[k].1),
        Field3::from_fn(dims, |_, _, k| column[k].2),
        (surface_z >= 0.0).then_some(surface_z),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeographicBounds;
    use approx::assert_relative_eq;

    pub(crate) fn reference_layers() -> Vec<Layer> {
        [
            (0.0, 4.90, 2.816, 2.50),
            (3.0, 5.40, 3.103, 2.60),
            (5.0, 6.00, 3.448, 2.70),
            (7.0, 6.90, 3.966, 2.80),
            (20.0, 7.60, 4.368, 3.10),
            (26.0, 7.80, 4.483, 3.26),
            (34.0, 8.00, 4.598, 3.30),
        ]
        .into_iter()
        .map(|(top_depth, vp, vs, rho)| Layer {
            top_depth,
            vp,
            vs,
            rho,
        })
        .collect()
    }

    fn domain(depth: (f64, f64), dims: [usize; 3]) -> SimulationDomain {
        let b = GeographicBounds::new((17.78, 21.63), (-78.27, -71.86), depth).unwrap();
        SimulationDomain::new(b, dims, 0.1, 10, chrono::DateTime::UNIX_EPOCH).unwrap()
    }

    #[test]
    fn lame_examples() {
        let (l, m) = lame_from_velocities(4900.0, 2816.0, 2500.0).unwrap();
        assert_relative_eq!(m, 1.98246e10, max_relative = 3e-6);
        assert_relative_eq!(l, 2.0376e10, max_relative = 1e-4);
        let (l, m) = lame_from_velocities(3f64.sqrt(), 1.0, 1.0).unwrap();
        assert_relative_eq!(l, 1.0, max_relative = 1e-12);
        assert_eq!(m, 1.0);
        assert!(lame_from_velocities(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(LayeredModel::new(vec![]).is_err());
        let mut bad = reference_layers();
        bad[2].top_depth = 2.0;
        assert!(LayeredModel::new(bad).is_err());
        let mut bad = reference_layers();
        bad[1].vs = 5.0;
        let err = LayeredModel::new(bad).unwrap_err().to_string();
        assert!(err.contains("layer 1"), "{err}");
        let m = LayeredModel::new(reference_layers()).unwrap();
        assert_eq!(m.vp_max(), 8000.0);
        assert_eq!(m.vel_min(), 2816.0);
        assert_eq!(m.layer_at(4.0).vp, 5.40);
        assert_eq!(m.layer_at(3.0).vp, 5.40);
        assert_eq!(m.layer_at(100.0).vp, 8.00);
    }

    #[test]
    fn parse_model_table() {
        let text = "# top vp vs rho\n0.0 4.90 2.816 2.50\n 3.0 5.40 3.103 2.60 # second\n\n";
        let m = LayeredModel::parse_table(text).unwrap();
        assert_eq!(m.layers().len(), 2);
        assert_eq!(m.layers()[1].vs, 3.103);
        assert!(LayeredModel::parse_table("0.0 4.9 2.8").is_err());
        assert!(LayeredModel::parse_table("0.0 4.9 x 2.5").is_err());
    }

    #[test]
    fn single_layer_is_constant_at_any_resolution() {
        let layer = Layer {
            top_depth: 0.0,
            ..reference_layers()[2]
        };
        let model = LayeredModel::new(vec![layer]).unwrap();
        let d = domain((0.0, 90.0), [16, 16, 16]);
        let expected = reference_layers()[2].si_parameters().unwrap();
        for dims in [[2, 2, 2], [3, 5, 7], [16, 16, 16]] {
            let v = build_parameter_volume(&model, &d, dims).unwrap();
            assert!(v.rho.as_slice().iter().all(|&r| r == expected.0));
            assert!(v.lambda.as_slice().iter().all(|&l| l == expected.1));
            assert!(v.mu.as_slice().iter().all(|&m| m == expected.2));
        }
    }

    #[test]
    fn layer_selection_and_vacuum() {
        let model = LayeredModel::new(reference_layers()).unwrap();
        // 1 km cells from -30 km: cell k centre at depth k - 29.5
        let d = domain((-30.0, 90.0), [8, 8, 120]);
        let v = build_parameter_volume(&model, &d, [2, 2, 120]).unwrap();
        // centre depth 4.5 km lies in the layer topped at 3.0 km
        let (rho, _, _) = reference_layers()[1].si_parameters().unwrap();
        assert_eq!(v.rho.get(0, 0, 34), rho);
        // centre depth -4.5 km is above the surface
        assert_eq!(v.rho.get(1, 1, 25), VACUUM_DENSITY);
        assert_eq!(v.mu.get(1, 1, 25), 0.0);
        assert!(is_vacuum(v.rho.get(1, 1, 25)));
        assert_eq!(v.surface_z, Some(30_000.0));
        for &r in v.rho.as_slice().iter().filter(|r| !is_vacuum(**r)) {
            assert!((1000.0..=5000.0).contains(&r));
        }
    }

    #[test]
    fn vacuum_threshold_is_strict() {
        assert!(!is_vacuum(2500.0));
        assert!(is_vacuum(VACUUM_DENSITY));
        assert!(!is_vacuum(VACUUM_THRESHOLD));
    }

    #[test]
    fn sampling_matches_nodes_when_grids_coincide() {
        let dims = [4, 3, 5];
        let v = ParameterVolume::new(
            Field3::from_fn(dims, |i, j, k| 1000.0 + (i + 10 * j + 100 * k) as f64),
            Field3::from_fn(dims, |i, _, _| i as f64),
            Field3::from_fn(dims, |_, _, k| k as f64),
            None,
        )
        .unwrap();
        let g = Grid::new(dims, [1.0; 3]).unwrap();
        for (i, j, k) in [(0, 0, 0), (3, 2, 4), (1, 1, 2)] {
            let s = v.sample(&g, [i as f64, j as f64, k as f64]);
            assert_eq!(s.rho, v.rho.get(i, j, k));
            assert_eq!(s.lambda, i as f64);
            assert_eq!(s.mu, k as f64);
        }
    }

    #[test]
    fn sampling_between_layers_is_linear_in_z() {
        // two parameter cells along z: centres at sim coordinates 1.5 and 5.5
        let dims = [2, 2, 2];
        let v = ParameterVolume::<f64>::new(
            Field3::from_fn(dims, |_, _, k| [2500.0, 2700.0][k]),
            Field3::from_fn(dims, |_, _, k| [2.0e10, 3.0e10][k]),
            Field3::from_fn(dims, |_, _, k| [1.0e10, 1.5e10][k]),
            None,
        )
        .unwrap();
        let g = Grid::new([8, 8, 8], [1.0; 3]).unwrap();
        assert_eq!(to_param_coord(1.5, 8, 2), 0.0);
        assert_eq!(to_param_coord(5.5, 8, 2), 1.0);
        let s = v.sample(&g, [3.0, 2.0, 3.5]);
        assert_relative_eq!(s.rho, 2600.0, max_relative = 1e-12);
        assert_relative_eq!(s.lambda, 2.5e10, max_relative = 1e-12);
        assert_relative_eq!(s.mu, 1.25e10, max_relative = 1e-12);
    }

    #[test]
    fn parameter_dims_default_to_quarter() {
        assert_eq!(default_parameter_dims([64, 64, 32]), [16, 16, 8]);
        assert_eq!(default_parameter_dims([4, 7, 9]), [2, 2, 2]);
    }

    #[test]
    fn velocity_range_skips_vacuum() {
        let model = LayeredModel::new(reference_layers()).unwrap();
        let d = domain((-30.0, 90.0), [8, 8, 60]);
        let v = build_parameter_volume(&model, &d, [2, 2, 60]).unwrap();
        let (hi, lo) = v.velocity_range().unwrap();
        assert_relative_eq!(hi, 8000.0, max_relative = 1e-9);
        assert_relative_eq!(lo, 2816.0, max_relative = 1e-9);
    }
}
