//! Per-z-slice phase kernels shared by the serial and parallel backends.
//!
//! Each output node is a single expression over the other phase's fields and
//! the medium, so splitting the slices across threads cannot change results.

use rayon::prelude::*;

use super::fields::FieldSet;
use super::sponge::{SpongeProfile, SpongeWeights};
use super::stencil::{stencil2, stencil4};
use super::{Backend, SolverOptions};
use crate::field::{axis_weight, mirrored_index, trilinear_with, AxisWeight, Field3};
use crate::geometry::Grid;
use crate::medium::{to_param_coord, ParameterVolume, VACUUM_THRESHOLD};
use crate::real::Real;

/// Mirrored neighbour offsets along one axis, pre-multiplied by the axis stride.
///
/// `fwd[i]` serves points at `i + 0.5` reading integer nodes `i-1 ..= i+2`;
/// `bwd[i]` serves points at `i` reading half nodes stored at `i-2 ..= i+1`.
#[derive(Debug, Clone)]
struct AxisTable {
    fwd: Vec<[usize; 4]>,
    bwd: Vec<[usize; 4]>,
}

impl AxisTable {
    fn new(n: usize, stride: usize) -> Self {
        let m = |i: usize, d: isize| mirrored_index(i as isize + d, n) * stride;
        AxisTable {
            fwd: (0..n).map(|i| [m(i, -1), m(i, 0), m(i, 1), m(i, 2)]).collect(),
            bwd: (0..n).map(|i| [m(i, -2), m(i, -1), m(i, 0), m(i, 1)]).collect(),
        }
    }
}

/// Trilinear weights of the parameter grid at integer (`[0]`) and half (`[1]`) positions.
#[derive(Debug, Clone)]
struct MediumTables<T> {
    x: [Vec<AxisWeight<T>>; 2],
    y: [Vec<AxisWeight<T>>; 2],
    z: [Vec<AxisWeight<T>>; 2],
}

impl<T: Real> MediumTables<T> {
    fn new(grid: &Grid, param: [usize; 3]) -> Self {
        let axis = |n_sim: usize, n_par: usize| -> [Vec<AxisWeight<T>>; 2] {
            let at = |off: f64| {
                (0..n_sim)
                    .map(|i| axis_weight(to_param_coord(i as f64 + off, n_sim, n_par), n_par))
                    .collect()
            };
            [at(0.0), at(0.5)]
        };
        MediumTables {
            x: axis(grid.nx, param[0]),
            y: axis(grid.ny, param[1]),
            z: axis(grid.nz, param[2]),
        }
    }

    #[inline(always)]
    fn sample(&self, f: &Field3<T>, i: usize, j: usize, k: usize, h: [usize; 3]) -> T {
        trilinear_with(f, self.x[h[0]][i], self.y[h[1]][j], self.z[h[2]][k])
    }
}

/// Medium parameters pre-sampled at every staggered position.
#[derive(Debug, Clone)]
struct MediumCache<T> {
    rho_vx: Vec<T>,
    rho_vy: Vec<T>,
    rho_vz: Vec<T>,
    lambda: Vec<T>,
    mu: Vec<T>,
    mu_xy: Vec<T>,
    mu_xz: Vec<T>,
    mu_yz: Vec<T>,
}

impl<T: Real> MediumCache<T> {
    fn new(grid: &Grid, volume: &ParameterVolume<T>, tables: &MediumTables<T>) -> Self {
        let fill = |f: &Field3<T>, h: [usize; 3]| -> Vec<T> {
            let mut out = Vec::with_capacity(grid.len());
            for k in 0..grid.nz {
                for j in 0..grid.ny {
                    for i in 0..grid.nx {
                        out.push(tables.sample(f, i, j, k, h));
                    }
                }
            }
            out
        };
        MediumCache {
            rho_vx: fill(&volume.rho, [1, 0, 0]),
            rho_vy: fill(&volume.rho, [0, 1, 0]),
            rho_vz: fill(&volume.rho, [0, 0, 1]),
            lambda: fill(&volume.lambda, [0, 0, 0]),
            mu: fill(&volume.mu, [0, 0, 0]),
            mu_xy: fill(&volume.mu, [1, 1, 0]),
            mu_xz: fill(&volume.mu, [1, 0, 1]),
            mu_yz: fill(&volume.mu, [0, 1, 1]),
        }
    }
}

/// Largest |value| written in a phase and whether every value was finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PhaseStats {
    pub max_abs: f64,
    pub finite: bool,
}

impl PhaseStats {
    const EMPTY: PhaseStats = PhaseStats {
        max_abs: 0.0,
        finite: true,
    };

    fn merge(self, other: PhaseStats) -> PhaseStats {
        PhaseStats {
            max_abs: self.max_abs.max(other.max_abs),
            finite: self.finite && other.finite,
        }
    }

    #[inline(always)]
    fn observe<T: Real>(&mut self, v: T) {
        let a = v.abs().to_f64_lossy();
        if a > self.max_abs {
            self.max_abs = a;
        }
        self.finite &= v.is_finite();
    }
}

struct Stresses<'a, T> {
    xx: &'a [T],
    yy: &'a [T],
    zz: &'a [T],
    xy: &'a [T],
    xz: &'a [T],
    yz: &'a [T],
}

struct Velocities<'a, T> {
    x: &'a [T],
    y: &'a [T],
    z: &'a [T],
}

#[inline(always)]
fn d4<T: Real>(f: &[T], t: &[usize; 4], base: usize, inv_h: T) -> T {
    stencil4(f[t[0] + base], f[t[1] + base], f[t[2] + base], f[t[3] + base], inv_h)
}

#[inline(always)]
fn d2<T: Real>(f: &[T], t: &[usize; 4], base: usize, inv_h: T) -> T {
    stencil2(f[t[1] + base], f[t[2] + base], inv_h)
}

#[inline(always)]
fn dz<T: Real>(low_order: bool, f: &[T], t: &[usize; 4], base: usize, inv_h: T) -> T {
    if low_order {
        d2(f, t, base, inv_h)
    } else {
        d4(f, t, base, inv_h)
    }
}

/// Precomputed state for both update phases on one grid.
#[derive(Debug, Clone)]
pub(crate) struct Kernels<T> {
    grid: Grid,
    dt: T,
    inv_h: [T; 3],
    volume: ParameterVolume<T>,
    tables: MediumTables<T>,
    cache: Option<MediumCache<T>>,
    ax: [AxisTable; 3],
    sponge: SpongeWeights<T>,
    /// 2nd-order z derivatives at integer / half z positions near the free surface.
    low_order: [Vec<bool>; 2],
    backend: Backend,
}

impl<T: Real> Kernels<T> {
    pub fn new(
        grid: Grid,
        dt: f64,
        volume: ParameterVolume<T>,
        sponge: &SpongeProfile,
        options: &SolverOptions,
    ) -> Self {
        let tables = MediumTables::new(&grid, volume.dims());
        let cache = options
            .cache_medium
            .then(|| MediumCache::new(&grid, &volume, &tables));
        let band = |offset: f64| -> Vec<bool> {
            match volume.surface_z {
                Some(zs) => {
                    let surface = grid.to_grid_coords([0.0, 0.0, zs])[2];
                    (0..grid.nz)
                        .map(|k| (k as f64 + offset - surface).abs() < options.near_surface_band)
                        .collect()
                }
                None => vec![false; grid.nz],
            }
        };
        Kernels {
            dt: T::lit(dt),
            inv_h: grid.spacing().map(|h| T::lit(1.0 / h)),
            tables,
            cache,
            ax: [
                AxisTable::new(grid.nx, 1),
                AxisTable::new(grid.ny, grid.nx),
                AxisTable::new(grid.nz, grid.nx * grid.ny),
            ],
            sponge: sponge.axis_weights(&grid),
            low_order: [band(0.0), band(0.5)],
            backend: options.backend,
            grid,
            volume,
        }
    }

    pub fn volume(&self) -> &ParameterVolume<T> {
        &self.volume
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Density at the three velocity positions of cell `(i, j, k)`.
    #[inline(always)]
    fn rho_v(&self, i: usize, j: usize, k: usize, idx: usize) -> [T; 3] {
        match &self.cache {
            Some(c) => [c.rho_vx[idx], c.rho_vy[idx], c.rho_vz[idx]],
            None => {
                let r = &self.volume.rho;
                [
                    self.tables.sample(r, i, j, k, [1, 0, 0]),
                    self.tables.sample(r, i, j, k, [0, 1, 0]),
                    self.tables.sample(r, i, j, k, [0, 0, 1]),
                ]
            }
        }
    }

    /// `[lambda, mu, mu_xy, mu_xz, mu_yz]` at the stress positions of cell `(i, j, k)`.
    #[inline(always)]
    fn lame_s(&self, i: usize, j: usize, k: usize, idx: usize) -> [T; 5] {
        match &self.cache {
            Some(c) => [c.lambda[idx], c.mu[idx], c.mu_xy[idx], c.mu_xz[idx], c.mu_yz[idx]],
            None => {
                let v = &self.volume;
                let t = &self.tables;
                [
                    t.sample(&v.lambda, i, j, k, [0, 0, 0]),
                    t.sample(&v.mu, i, j, k, [0, 0, 0]),
                    t.sample(&v.mu, i, j, k, [1, 1, 0]),
                    t.sample(&v.mu, i, j, k, [1, 0, 1]),
                    t.sample(&v.mu, i, j, k, [0, 1, 1]),
                ]
            }
        }
    }

    fn velocity_slice(
        &self,
        k: usize,
        s: &Stresses<'_, T>,
        vx: &mut [T],
        vy: &mut [T],
        vz: &mut [T],
    ) -> PhaseStats {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let [ihx, ihy, ihz] = self.inv_h;
        let [tx, ty, tz] = &self.ax;
        let ko = k * nx * ny;
        let (zf, zb) = (&tz.fwd[k], &tz.bwd[k]);
        let low_int = self.low_order[0][k];
        let low_half = self.low_order[1][k];
        let vacuum = T::lit(VACUUM_THRESHOLD);
        let dt = self.dt;
        let mut stats = PhaseStats::EMPTY;

        for j in 0..ny {
            let jo = j * nx;
            let (yf, yb) = (&ty.fwd[j], &ty.bwd[j]);
            let wyz = self.sponge.y[j] * self.sponge.z[k];
            for i in 0..nx {
                let (xf, xb) = (&tx.fwd[i], &tx.bwd[i]);
                let c = i + jo;
                let idx = c + ko;
                let w = self.sponge.x[i] * wyz;
                let [rx, ry, rz] = self.rho_v(i, j, k, idx);

                let ax = d4(s.xx, xf, jo + ko, ihx)
                    + d4(s.xy, yb, i + ko, ihy)
                    + dz(low_int, s.xz, zb, c, ihz);
                let ay = d4(s.xy, xb, jo + ko, ihx)
                    + d4(s.yy, yf, i + ko, ihy)
                    + dz(low_int, s.yz, zb, c, ihz);
                let az = d4(s.xz, xb, jo + ko, ihx)
                    + d4(s.yz, yb, i + ko, ihy)
                    + dz(low_half, s.zz, zf, c, ihz);

                let nvx = if rx < vacuum { T::zero() } else { (vx[c] + dt / rx * ax) * w };
                let nvy = if ry < vacuum { T::zero() } else { (vy[c] + dt / ry * ay) * w };
                let nvz = if rz < vacuum { T::zero() } else { (vz[c] + dt / rz * az) * w };
                vx[c] = nvx;
                vy[c] = nvy;
                vz[c] = nvz;
                stats.observe(nvx);
                stats.observe(nvy);
                stats.observe(nvz);
            }
        }
        stats
    }

    #[allow(clippy::too_many_arguments)]
    fn stress_slice(
        &self,
        k: usize,
        v: &Velocities<'_, T>,
        sxx: &mut [T],
        syy: &mut [T],
        szz: &mut [T],
        sxy: &mut [T],
        sxz: &mut [T],
        syz: &mut [T],
    ) -> PhaseStats {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let [ihx, ihy, ihz] = self.inv_h;
        let [tx, ty, tz] = &self.ax;
        let ko = k * nx * ny;
        let (zf, zb) = (&tz.fwd[k], &tz.bwd[k]);
        let low_int = self.low_order[0][k];
        let low_half = self.low_order[1][k];
        let dt = self.dt;
        let two = T::lit(2.0);
        let mut stats = PhaseStats::EMPTY;

        for j in 0..ny {
            let jo = j * nx;
            let (yf, yb) = (&ty.fwd[j], &ty.bwd[j]);
            let wyz = self.sponge.y[j] * self.sponge.z[k];
            for i in 0..nx {
                let (xf, xb) = (&tx.fwd[i], &tx.bwd[i]);
                let c = i + jo;
                let idx = c + ko;
                let w = self.sponge.x[i] * wyz;
                let [lambda, mu, mu_xy, mu_xz, mu_yz] = self.lame_s(i, j, k, idx);

                let exx = d4(v.x, xb, jo + ko, ihx);
                let eyy = d4(v.y, yb, i + ko, ihy);
                let ezz = dz(low_int, v.z, zb, c, ihz);
                let div = exx + eyy + ezz;

                let nxx = (sxx[c] + dt * (lambda * div + two * mu * exx)) * w;
                let nyy = (syy[c] + dt * (lambda * div + two * mu * eyy)) * w;
                let nzz = (szz[c] + dt * (lambda * div + two * mu * ezz)) * w;

                let gxy = d4(v.y, xf, jo + ko, ihx) + d4(v.x, yf, i + ko, ihy);
                let gxz = d4(v.z, xf, jo + ko, ihx) + dz(low_half, v.x, zf, c, ihz);
                let gyz = d4(v.z, yf, i + ko, ihy) + dz(low_half, v.y, zf, c, ihz);

                let nxy = (sxy[c] + dt * mu_xy * gxy) * w;
                let nxz = (sxz[c] + dt * mu_xz * gxz) * w;
                let nyz = (syz[c] + dt * mu_yz * gyz) * w;

                sxx[c] = nxx;
                syy[c] = nyy;
                szz[c] = nzz;
                sxy[c] = nxy;
                sxz[c] = nxz;
                syz[c] = nyz;
                for s in [nxx, nyy, nzz, nxy, nxz, nyz] {
                    stats.observe(s);
                }
            }
        }
        stats
    }

    /// Advances velocities from the current stresses.
    pub fn velocity_phase(&self, f: &mut FieldSet<T>) -> PhaseStats {
        let slab = self.grid.nx * self.grid.ny;
        let FieldSet {
            vx,
            vy,
            vz,
            sxx,
            syy,
            szz,
            sxy,
            sxz,
            syz,
        } = f;
        let s = Stresses {
            xx: sxx.as_slice(),
            yy: syy.as_slice(),
            zz: szz.as_slice(),
            xy: sxy.as_slice(),
            xz: sxz.as_slice(),
            yz: syz.as_slice(),
        };
        let (vx, vy, vz) = (vx.as_mut_slice(), vy.as_mut_slice(), vz.as_mut_slice());
        match self.backend {
            Backend::Serial => vx
                .chunks_mut(slab)
                .zip(vy.chunks_mut(slab))
                .zip(vz.chunks_mut(slab))
                .enumerate()
                .map(|(k, ((a, b), c))| self.velocity_slice(k, &s, a, b, c))
                .fold(PhaseStats::EMPTY, PhaseStats::merge),
            Backend::Parallel => (
                vx.par_chunks_mut(slab),
                vy.par_chunks_mut(slab),
                vz.par_chunks_mut(slab),
            )
                .into_par_iter()
                .enumerate()
                .map(|(k, (a, b, c))| self.velocity_slice(k, &s, a, b, c))
                .reduce(|| PhaseStats::EMPTY, PhaseStats::merge),
        }
    }

    /// Advances stresses from the current velocities.
    pub fn stress_phase(&self, f: &mut FieldSet<T>) -> PhaseStats {
        let slab = self.grid.nx * self.grid.ny;
        let FieldSet {
            vx,
            vy,
            vz,
            sxx,
            syy,
            szz,
            sxy,
            sxz,
            syz,
        } = f;
        let v = Velocities {
            x: vx.as_slice(),
            y: vy.as_slice(),
            z: vz.as_slice(),
        };
        let outs = (
            sxx.as_mut_slice(),
            syy.as_mut_slice(),
            szz.as_mut_slice(),
            sxy.as_mut_slice(),
            sxz.as_mut_slice(),
            syz.as_mut_slice(),
        );
        match self.backend {
            Backend::Serial => {
                let (a, b, c, d, e, g) = outs;
                a.chunks_mut(slab)
                    .zip(b.chunks_mut(slab))
                    .zip(c.chunks_mut(slab))
                    .zip(d.chunks_mut(slab))
                    .zip(e.chunks_mut(slab))
                    .zip(g.chunks_mut(slab))
                    .enumerate()
                    .map(|(k, (((((a, b), c), d), e), g))| {
                        self.stress_slice(k, &v, a, b, c, d, e, g)
                    })
                    .fold(PhaseStats::EMPTY, PhaseStats::merge)
            }
            Backend::Parallel => {
                let (a, b, c, d, e, g) = outs;
                (
                    a.par_chunks_mut(slab),
                    b.par_chunks_mut(slab),
                    c.par_chunks_mut(slab),
                    d.par_chunks_mut(slab),
                    e.par_chunks_mut(slab),
                    g.par_chunks_mut(slab),
                )
                    .into_par_iter()
                    .enumerate()
                    .map(|(k, (a, b, c, d, e, g))| self.stress_slice(k, &v, a, b, c, d, e, g))
                    .reduce(|| PhaseStats::EMPTY, PhaseStats::merge)
            }
        }
    }
}
