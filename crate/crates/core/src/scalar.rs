//! Scalar abstraction shared by every signal-processing stage.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point sample type: `f32` or `f64`.
///
/// Everything numeric in the crate is generic over this trait; the crate root
/// exposes `f64` aliases for the common types.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + rustfft::FftNum
    + 'static
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Round a non-negative value to the nearest `usize` (halves away from zero).
#[inline]
pub(crate) fn round_usize<T: Real>(x: T) -> usize {
    x.round().to_usize().unwrap_or(0)
}

#[inline]
pub(crate) fn sum_sq<T: Real>(xs: &[T]) -> T {
    xs.iter().map(|&x| x * x).sum()
}

#[inline]
pub(crate) fn rms<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    (sum_sq(xs) / T::from_usize_lossy(xs.len())).sqrt()
}
