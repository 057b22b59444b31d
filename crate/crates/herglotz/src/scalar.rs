use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Floating-point scalar used by the generic numerical kernels.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant. Never fails for `f32`/`f64`.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
}
