//! Staggered first-derivative stencils.

use crate::real::Real;

const C1: f64 = 9.0 / 8.0;
const C2: f64 = -1.0 / 24.0;

/// 4th-order staggered difference from samples at `x-1.5, x-0.5, x+0.5, x+1.5`.
#[inline(always)]
pub(crate) fn stencil4<T: Real>(m15: T, m05: T, p05: T, p15: T, inv_h: T) -> T {
    (T::lit(C1) * (p05 - m05) + T::lit(C2) * (p15 - m15)) * inv_h
}

/// 2nd-order staggered difference from samples at `x-0.5, x+0.5`.
#[inline(always)]
pub(crate) fn stencil2<T: Real>(m05: T, p05: T, inv_h: T) -> T {
    (p05 - m05) * inv_h
}

/// `[-f(x+1.5)/24 + 9 f(x+0.5)/8 - 9 f(x-0.5)/8 + f(x-1.5)/24] / h`
pub fn derivative4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    stencil4(f(x - 1.5), f(x - 0.5), f(x + 0.5), f(x + 1.5), 1.0 / h)
}

/// `[f(x+0.5) - f(x-0.5)] / h`
pub fn derivative2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    stencil2(f(x - 0.5), f(x + 0.5), 1.0 / h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_examples() {
        assert_eq!(derivative4(|x| x, 0.3, 1.0), 1.0);
        assert_eq!(derivative4(|x| x * x * x, 1.0, 1.0), 3.0);
        assert_eq!(derivative4(|_| 7.5, 2.0, 3.0), 0.0);
        assert_eq!(derivative2(|x| x, 4.0, 1.0), 1.0);
        assert_eq!(derivative2(|x| x * x, 0.0, 1.0), 0.0);
        assert_eq!(derivative2(|x| x * x * x, 1.0, 1.0), 3.25);
    }

    #[test]
    fn spacing_scales_result() {
        // f(x) = 2x on a grid of spacing h in coordinate units of cells
        let d = derivative4(|x| 2.0 * x, 5.0, 0.25);
        assert!((d - 8.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn cubic_exactness(
            a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0,
            x in -4.0f64..4.0,
        ) {
            let f = |t: f64| a + b * t + c * t * t + d * t * t * t;
            let exact = b + 2.0 * c * x + 3.0 * d * x * x;
            let got = derivative4(f, x, 1.0);
            prop_assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        }
    }
}
