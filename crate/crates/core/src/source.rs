//! Moment-tensor point sources and their time functions.

use std::f64::consts::PI;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{axis_weight, Field3};
use crate::geometry::{Component, Grid, SimulationDomain};
use crate::real::Real;
use crate::solver::FieldSet;

/// Symmetric 3×3 moment tensor, N·m. Only the six independent entries are stored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentTensor {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl MomentTensor {
    pub fn isotropic(m0: f64) -> Self {
        MomentTensor {
            xx: m0,
            yy: m0,
            zz: m0,
            ..Default::default()
        }
    }

    /// Rejects matrices whose off-diagonal pairs differ.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            if m[a][b] != m[b][a] {
                return Err(Error::config(format!(
                    "moment tensor is not symmetric: m[{a}][{b}] = {} but m[{b}][{a}] = {}",
                    m[a][b], m[b][a]
                )));
            }
        }
        Ok(MomentTensor {
            xx: m[0][0],
            yy: m[1][1],
            zz: m[2][2],
            xy: m[0][1],
            xz: m[0][2],
            yz: m[1][2],
        })
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    pub fn transpose(&self) -> Self {
        *self
    }

    /// Entry driving a stress component; zero for velocity components.
    pub fn component(&self, c: Component) -> f64 {
        match c {
            Component::Sxx => self.xx,
            Component::Syy => self.yy,
            Component::Szz => self.zz,
            Component::Sxy => self.xy,
            Component::Sxz => self.xz,
            Component::Syz => self.yz,
            _ => 0.0,
        }
    }

    /// Scalar moment `sqrt(sum m_ij² / 2)`.
    pub fn scalar_moment(&self) -> f64 {
        let m = self.to_matrix();
        (m.iter().flatten().map(|v| v * v).sum::<f64>() / 2.0).sqrt()
    }
}

impl std::ops::Add for MomentTensor {
    type Output = MomentTensor;

    fn add(self, o: MomentTensor) -> MomentTensor {
        MomentTensor {
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            zz: self.zz + o.zz,
            xy: self.xy + o.xy,
            xz: self.xz + o.xz,
            yz: self.yz + o.yz,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StfKind {
    #[default]
    Ricker,
    GaussianDerivative,
}

/// Band-limited source wavelet with unit peak amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceTimeFunction {
    pub kind: StfKind,
    /// Hz.
    pub peak_frequency: f64,
    /// Time of the wavelet centre after simulation start, seconds.
    pub delay: f64,
}

impl SourceTimeFunction {
    /// Ricker wavelet centred `1.5 / f_p` after the start.
    pub fn ricker(peak_frequency: f64) -> Self {
        SourceTimeFunction {
            kind: StfKind::Ricker,
            peak_frequency,
            delay: 1.5 / peak_frequency,
        }
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        evaluate_stf(self, t)
    }
}

/// Ricker: `(1 - 2u) exp(-u)` with `u = (pi f_p (t - t0))²`.
///
/// The Gaussian derivative is scaled so its amplitude spectrum also peaks at `f_p`.
pub fn evaluate_stf(stf: &SourceTimeFunction, t: f64) -> f64 {
    let tau = t - stf.delay;
    match stf.kind {
        StfKind::Ricker => {
            let a = PI * stf.peak_frequency * tau;
            let u = a * a;
            (1.0 - 2.0 * u) * (-u).exp()
        }
        StfKind::GaussianDerivative => {
            let x = std::f64::consts::SQRT_2 * PI * stf.peak_frequency * tau;
            -(2.0 * std::f64::consts::E).sqrt() * x * (-x * x).exp()
        }
    }
}

/// Moment-tensor source placed in geographic coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTensorSource {
    pub moment: MomentTensor,
    /// `(lat, lon, depth_km)`.
    pub location: (f64, f64, f64),
    pub centroid_time: Option<DateTime<Utc>>,
    pub stf: SourceTimeFunction,
}

impl MomentTensorSource {
    pub fn to_point(&self, domain: &SimulationDomain, sign: f64) -> Result<PointSource> {
        let (lat, lon, depth) = self.location;
        let position = domain
            .grid_position(lat, lon, depth)
            .map_err(|e| Error::config(format!("source outside domain: {e}")))?;
        PointSource::new(self.moment, position, self.stf, sign, &domain.grid)
    }
}

/// Source on the simulation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource {
    pub moment: MomentTensor,
    /// Real-valued node coordinates.
    pub position: [f64; 3],
    pub stf: SourceTimeFunction,
    /// Multiplier on the injected moment rate, `-1` by default.
    pub sign: f64,
}

impl PointSource {
    pub fn new(
        moment: MomentTensor,
        position: [f64; 3],
        stf: SourceTimeFunction,
        sign: f64,
        grid: &Grid,
    ) -> Result<Self> {
        let dims = grid.dims();
        for a in 0..3 {
            if !(position[a] >= -0.5 && position[a] <= dims[a] as f64 - 0.5) {
                return Err(Error::config(format!(
                    "source grid position {position:?} outside grid {dims:?}"
                )));
            }
        }
        Ok(PointSource {
            moment,
            position,
            stf,
            sign,
        })
    }
}

fn add_trilinear<T: Real>(f: &mut Field3<T>, q: [f64; 3], amount: f64) {
    let d = f.dims();
    let wx = axis_weight::<f64>(q[0], d[0]);
    let wy = axis_weight::<f64>(q[1], d[1]);
    let wz = axis_weight::<f64>(q[2], d[2]);
    for (k, tz) in [(wz.lo, 1.0 - wz.t), (wz.hi, wz.t)] {
        for (j, ty) in [(wy.lo, 1.0 - wy.t), (wy.hi, wy.t)] {
            for (i, tx) in [(wx.lo, 1.0 - wx.t), (wx.hi, wx.t)] {
                let w = tx * ty * tz;
                if w != 0.0 {
                    let v = f.get(i, j, k) + T::lit(amount * w);
                    f.set(i, j, k, v);
                }
            }
        }
    }
}

/// Adds `sign * m_c * stf(t) * dt / cell_volume` to each stress component,
/// spread over the 8 nearest nodes of that component by trilinear weights.
pub fn inject_source<T: Real>(
    fields: &mut FieldSet<T>,
    source: &PointSource,
    grid: &Grid,
    t_index: usize,
    dt: f64,
) {
    let t = t_index as f64 * dt;
    let rate = source.sign * source.stf.evaluate(t) * dt / grid.cell_volume();
    if rate == 0.0 {
        return;
    }
    for c in Component::STRESSES {
        let m = source.moment.component(c);
        if m == 0.0 {
            continue;
        }
        let o = c.offset();
        let p = source.position;
        let q = [p[0] - o[0], p[1] - o[1], p[2] - o[2]];
        add_trilinear(fields.get_mut(c), q, m * rate);
    }
}
