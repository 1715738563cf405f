//! Exponential edge taper for absorbing outgoing waves.

use serde::{Deserialize, Serialize};

use crate::geometry::Grid;
use crate::real::Real;

/// Face order used by [`SpongeProfile::faces`].
pub const FACE_NAMES: [&str; 6] = ["x_min", "x_max", "y_min", "y_max", "z_min", "z_max"];

/// Taper `w = exp(-(alpha * (width - d))^2)` for cells closer than `width` to a damped face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpongeProfile {
    /// Cells per face.
    pub width: usize,
    pub alpha: f64,
    /// Damped faces in [`FACE_NAMES`] order.
    pub faces: [bool; 6],
}

impl Default for SpongeProfile {
    fn default() -> Self {
        SpongeProfile {
            width: 20,
            alpha: 0.015,
            faces: [true; 6],
        }
    }
}

impl SpongeProfile {
    pub fn disabled() -> Self {
        SpongeProfile {
            width: 0,
            ..Default::default()
        }
    }

    /// Leaves the top (`z_min`) face undamped.
    pub fn with_free_surface(mut self) -> Self {
        self.faces[4] = false;
        self
    }

    /// Weight contributed by one face at distance `d` cells.
    pub fn face_factor(&self, d: usize) -> f64 {
        if d >= self.width {
            1.0
        } else {
            let x = self.alpha * (self.width - d) as f64;
            (-x * x).exp()
        }
    }

    fn axis_factor(&self, i: usize, n: usize, lo: bool, hi: bool) -> f64 {
        let mut w = 1.0;
        if lo {
            w *= self.face_factor(i);
        }
        if hi {
            w *= self.face_factor(n - 1 - i);
        }
        w
    }

    pub(crate) fn axis_weights<T: Real>(&self, grid: &Grid) -> SpongeWeights<T> {
        let axis = |n: usize, lo: bool, hi: bool| -> Vec<T> {
            (0..n).map(|i| T::lit(self.axis_factor(i, n, lo, hi))).collect()
        };
        SpongeWeights {
            x: axis(grid.nx, self.faces[0], self.faces[1]),
            y: axis(grid.ny, self.faces[2], self.faces[3]),
            z: axis(grid.nz, self.faces[4], self.faces[5]),
        }
    }

    /// Whether grid position `p` lies inside any damped layer.
    pub fn contains(&self, grid: &Grid, p: [f64; 3]) -> bool {
        let n = grid.dims();
        let w = self.width as f64;
        (0..3).any(|a| {
            (self.faces[2 * a] && p[a] < w) || (self.faces[2 * a + 1] && p[a] > (n[a] as f64 - 1.0) - w)
        })
    }
}

/// Product of per-face weights at cell `(i, j, k)`.
pub fn sponge_weight(i: usize, j: usize, k: usize, profile: &SpongeProfile, grid: &Grid) -> f64 {
    profile.axis_factor(i, grid.nx, profile.faces[0], profile.faces[1])
        * profile.axis_factor(j, grid.ny, profile.faces[2], profile.faces[3])
        * profile.axis_factor(k, grid.nz, profile.faces[4], profile.faces[5])
}

#[derive(Debug, Clone)]
pub(crate) struct SpongeWeights<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Real> SpongeWeights<T> {
    #[cfg(test)]
    pub fn at(&self, i: usize, j: usize, k: usize) -> T {
        self.x[i] * self.y[j] * self.z[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interior_weight_is_one() {
        let g = Grid::cubic(64, 1.0).unwrap();
        let p = SpongeProfile::default();
        assert_eq!(sponge_weight(32, 32, 32, &p, &g), 1.0);
        assert_eq!(sponge_weight(20, 43, 20, &p, &g), 1.0);
        assert!(sponge_weight(19, 32, 32, &p, &g) < 1.0);
    }

    #[test]
    fn edge_weight() {
        let g = Grid::cubic(64, 1.0).unwrap();
        let p = SpongeProfile::default();
        let w = sponge_weight(0, 32, 32, &p, &g);
        assert_relative_eq!(w, (-0.09f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(w, 0.9139, max_relative = 1e-4);
        assert_eq!(sponge_weight(63, 32, 32, &p, &g), w);
    }

    #[test]
    fn corner_is_product_of_faces() {
        let g = Grid::cubic(64, 1.0).unwrap();
        let p = SpongeProfile::default();
        let a = sponge_weight(3, 32, 32, &p, &g);
        let b = sponge_weight(32, 60, 32, &p, &g);
        assert_relative_eq!(sponge_weight(3, 60, 32, &p, &g), a * b, max_relative = 1e-15);
    }

    #[test]
    fn free_surface_face_undamped() {
        let g = Grid::cubic(64, 1.0).unwrap();
        let p = SpongeProfile::default().with_free_surface();
        assert_eq!(sponge_weight(32, 32, 0, &p, &g), 1.0);
        assert!(sponge_weight(32, 32, 63, &p, &g) < 1.0);
        assert_eq!(sponge_weight(0, 0, 0, &SpongeProfile::disabled(), &g), 1.0);
    }

    #[test]
    fn weights_table_matches_scalar() {
        let g = Grid::new([30, 25, 41], [1.0; 3]).unwrap();
        let p = SpongeProfile::default().with_free_surface();
        let t = p.axis_weights::<f64>(&g);
        for (i, j, k) in [(0, 0, 0), (5, 24, 40), (15, 12, 20), (29, 3, 1)] {
            assert_eq!(t.at(i, j, k), sponge_weight(i, j, k, &p, &g));
        }
    }

    #[test]
    fn weights_bounded() {
        let g = Grid::cubic(48, 1.0).unwrap();
        let p = SpongeProfile::default();
        for i in 0..48 {
            let w = sponge_weight(i, i, i, &p, &g);
            assert!(w > 0.0 && w <= 1.0);
        }
    }
}
