//! Dense 3D scalar arrays with mirrored-repeat addressing and trilinear reads.

use crate::real::Real;

/// Scalar field stored x-fastest: `data[i + nx * (j + ny * k)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3<T> {
    dims: [usize; 3],
    data: Vec<T>,
}

impl<T: Real> Field3<T> {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self::filled(dims, T::zero())
    }

    pub fn filled(dims: [usize; 3], value: T) -> Self {
        Field3 {
            dims,
            data: vec![value; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f(i, j, k));
                }
            }
        }
        Field3 { dims, data }
    }

    /// Panics if `data.len()` does not match `dims`.
    pub fn from_vec(dims: [usize; 3], data: Vec<T>) -> Self {
        assert_eq!(data.len(), dims[0] * dims[1] * dims[2], "field data length");
        Field3 { dims, data }
    }

    pub fn cast<U: Real>(&self) -> Field3<U> {
        Field3 {
            dims: self.dims,
            data: self.data.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
        }
    }

    pub fn fill(&mut self, value: T) {
        self.data.fill(value);
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T: Copy> Field3<T> {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: T) {
        let idx = self.index(i, j, k);
        self.data[idx] = value;
    }

    /// Read with out-of-range indices folded back by [`mirrored_index`].
    #[inline]
    pub fn get_mirrored(&self, i: isize, j: isize, k: isize) -> T {
        self.get(
            mirrored_index(i, self.dims[0]),
            mirrored_index(j, self.dims[1]),
            mirrored_index(k, self.dims[2]),
        )
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }
}

/// Mirrored-repeat wrap of an index into `[0, n)`, edge samples repeated.
///
/// `-1 -> 0`, `n -> n - 1`, period `2n`.
#[inline]
pub fn mirrored_index(i: isize, n: usize) -> usize {
    debug_assert!(n >= 1);
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Lower corner, upper corner and fractional weight along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct AxisWeight<T> {
    pub lo: usize,
    pub hi: usize,
    pub t: T,
}

#[inline]
pub(crate) fn axis_weight<T: Real>(q: f64, n: usize) -> AxisWeight<T> {
    let base = q.floor();
    let i0 = base as isize;
    AxisWeight {
        lo: mirrored_index(i0, n),
        hi: mirrored_index(i0 + 1, n),
        t: T::lit(q - base),
    }
}

#[inline]
pub(crate) fn lerp<T: Real>(a: T, b: T, t: T) -> T {
    a + (b - a) * t
}

#[inline]
pub(crate) fn trilinear_with<T: Real>(
    f: &Field3<T>,
    wx: AxisWeight<T>,
    wy: AxisWeight<T>,
    wz: AxisWeight<T>,
) -> T {
    let c = |i, j, k| f.get(i, j, k);
    let x00 = lerp(c(wx.lo, wy.lo, wz.lo), c(wx.hi, wy.lo, wz.lo), wx.t);
    let x10 = lerp(c(wx.lo, wy.hi, wz.lo), c(wx.hi, wy.hi, wz.lo), wx.t);
    let x01 = lerp(c(wx.lo, wy.lo, wz.hi), c(wx.hi, wy.lo, wz.hi), wx.t);
    let x11 = lerp(c(wx.lo, wy.hi, wz.hi), c(wx.hi, wy.hi, wz.hi), wx.t);
    let y0 = lerp(x00, x10, wy.t);
    let y1 = lerp(x01, x11, wy.t);
    lerp(y0, y1, wz.t)
}

/// Trilinear blend of the 8 samples around `p` (field grid units).
///
/// Corner lookups outside the field are resolved with [`mirrored_index`].
pub fn sample_trilinear<T: Real>(field: &Field3<T>, p: [f64; 3]) -> T {
    let [nx, ny, nz] = field.dims();
    trilinear_with(
        field,
        axis_weight(p[0], nx),
        axis_weight(p[1], ny),
        axis_weight(p[2], nz),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Walks the index back across the boundaries one reflection at a time.
    fn reflect_walk(mut i: isize, n: usize) -> usize {
        let n = n as isize;
        loop {
            if i < 0 {
                i = -1 - i;
            } else if i >= n {
                i = 2 * n - 1 - i;
            } else {
                return i as usize;
            }
        }
    }

    #[test]
    fn mirrored_examples() {
        assert_eq!(mirrored_index(-1, 8), 0);
        assert_eq!(mirrored_index(9, 8), 6);
        assert_eq!(mirrored_index(3, 8), 3);
        assert_eq!(mirrored_index(8, 8), 7);
        assert_eq!(mirrored_index(-2, 1), 0);
        assert_eq!(reflect_walk(9, 8), 6);
    }

    #[test]
    fn mirrored_matches_walk_oracle() {
        for n in [1usize, 2, 3, 5, 8, 64] {
            let n_i = n as isize;
            for i in -4 * n_i..=4 * n_i {
                assert_eq!(mirrored_index(i, n), reflect_walk(i, n), "i={i} n={n}");
            }
        }
    }

    proptest! {
        #[test]
        fn mirrored_idempotent_and_periodic(n in 1usize..100, frac in -4.0f64..4.0) {
            let i = (frac * n as f64).round() as isize;
            let m = mirrored_index(i, n);
            prop_assert!(m < n);
            prop_assert_eq!(mirrored_index(m as isize, n), m);
            prop_assert_eq!(mirrored_index(i + 2 * n as isize, n), m);
        }

        #[test]
        fn trilinear_reproduces_affine_fields(
            a in -10.0f64..10.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0,
            x in 0.0f64..6.999, y in 0.0f64..4.999, z in 0.0f64..5.999,
        ) {
            let f = Field3::from_fn([8, 6, 7], |i, j, k| a + b * i as f64 + c * j as f64 + d * k as f64);
            let got = sample_trilinear(&f, [x, y, z]);
            let want = a + b * x + c * y + d * z;
            prop_assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{} vs {}", got, want);
        }
    }

    #[test]
    fn constant_field_is_exact() {
        let f = Field3::filled([2, 2, 2], 3.7f64);
        for p in [[0.3, 0.9, 0.5], [0.0, 0.0, 0.0], [0.999, 0.5, 0.001]] {
            assert_eq!(sample_trilinear(&f, p), 3.7);
        }
    }

    #[test]
    fn cube_centre_is_corner_mean() {
        let f = Field3::from_fn([2, 2, 2], |i, j, k| (i + 2 * j + 4 * k) as f64);
        assert_eq!(sample_trilinear(&f, [0.5, 0.5, 0.5]), 3.5);
    }

    #[test]
    fn exact_at_nodes() {
        let f = Field3::from_fn([4, 3, 5], |i, j, k| (i * i + 3 * j + k * k * k) as f64 * 0.37);
        for k in 0..5 {
            for j in 0..3 {
                for i in 0..4 {
                    assert_eq!(sample_trilinear(&f, [i as f64, j as f64, k as f64]), f.get(i, j, k));
                }
            }
        }
    }

    #[test]
    fn out_of_range_reads_mirror() {
        let f = Field3::from_fn([4, 1, 1], |i, _, _| i as f64);
        assert_eq!(f.get_mirrored(-1, 0, 0), 0.0);
        assert_eq!(f.get_mirrored(-2, 0, 0), 1.0);
        assert_eq!(f.get_mirrored(5, 0, 0), 2.0);
        // between node 3 and its mirror image (also 3)
        assert_eq!(sample_trilinear(&f, [3.5, 0.0, 0.0]), 3.0);
    }
}
