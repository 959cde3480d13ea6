//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the simulator is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Magnitude below which integrator coefficients are flushed to zero.
    fn flush_floor() -> Self;

    /// Converts an `f64` constant. Panics only if the target type cannot hold
    /// any finite approximation, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn flush_floor() -> Self {
        f32::MIN_POSITIVE
    }
}

impl Real for f64 {
    fn flush_floor() -> Self {
        1e-300
    }
}

/// `expm1(x) / x`, continuous at zero.
#[inline]
pub(crate) fn expm1_ratio<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-8) {
        T::one() + x / T::lit(2.0)
    } else {
        x.exp_m1() / x
    }
}

/// `sin(x) / x`, continuous at zero.
#[inline]
pub(crate) fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-6) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}
