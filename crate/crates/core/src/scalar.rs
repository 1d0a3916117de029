//! Floating-point abstraction shared by every solver in the crate.

use std::fmt;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Real scalar type the solvers are generic over. Implemented for `f32` and `f64`.
///
/// Tolerances quoted throughout the crate (1e-12 and tighter) are only
/// attainable in `f64`; `f32` is supported for quick exploratory runs.
pub trait Scalar: Float + FloatConst + FftNum + Default + fmt::Display + fmt::LowerExp + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    fn lit(v: f64) -> Self;

    fn as_f64(self) -> f64;

    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}
