//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Tolerances throughout the crate are stated in `f64` terms and converted
/// with [`Real::of`]; [`Real::tol`] widens them to something attainable in
/// the scalar's own precision.
pub trait Real:
    RealField + Copy + Default + FromPrimitive + ToPrimitive + FloatConst + FftNum
{
    /// Machine epsilon as an `f64`.
    const EPS: f64;

    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts into `f64` for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// A tolerance of at least `x`, floored at a small multiple of machine epsilon.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::of(x.max(Self::EPS * 64.0))
    }

    /// Positive infinity.
    #[inline]
    fn infinity() -> Self {
        Self::of(f64::INFINITY)
    }

    #[inline]
    fn is_finite_val(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Real for f32 {
    const EPS: f64 = f32::EPSILON as f64;
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;
}
