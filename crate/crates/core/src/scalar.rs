//! Scalar abstraction for the core numerics.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point scalar the spectral machinery is generic over.
///
/// `f64` is the default everywhere; `f32` works but the shipped tolerances
/// assume double precision.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + rustfft::FftNum + Send + Sync + 'static
{
    fn from_f64_(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 conversion")
    }

    fn from_usize_(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize conversion")
    }

    fn to_f64_(self) -> f64;
}

impl Scalar for f64 {
    fn to_f64_(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn to_f64_(self) -> f64 {
        self as f64
    }
}
