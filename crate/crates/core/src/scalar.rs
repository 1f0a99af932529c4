//! Floating-point scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, NumCast};
use rustfft::FftNum;

/// Real scalar type usable by the engine: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumCast
    + NumAssign
    + FftNum
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or intermediate into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 is representable")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn of_usize(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("usize is representable")
    }

    /// Widens to `f64` for reporting and statistics.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }

    /// Machine epsilon scaled for loose internal comparisons.
    fn tiny() -> Self;
}

impl Scalar for f32 {
    fn tiny() -> Self {
        1e-30
    }
}

impl Scalar for f64 {
    fn tiny() -> Self {
        1e-300
    }
}
