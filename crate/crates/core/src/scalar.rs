//! Scalar abstraction shared by every numerical kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Floating point type the crate is generic over: `f32` or `f64`.
///
/// `FftNum` and `Float` both provide `abs`/`signum`; call those through
/// [`Real::magnitude`] or the fully qualified `Float::abs` to avoid ambiguity.
pub trait Real: FftNum + Float + FloatConst + Sum + Display + Debug + Default {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    #[inline]
    fn magnitude(self) -> Self {
        Float::abs(self)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
