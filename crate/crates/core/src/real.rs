use std::fmt::{Debug, Display};

use num_traits::{Float, NumCast};

/// Floating-point scalar the solver can run in.
///
/// Fields default to `f64`; `f32` gives a single-precision pass matching
/// the texture precision of device backends.
pub trait Real: Float + Default + Debug + Display + Send + Sync + 'static {
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("literal representable in the scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
