//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type usable throughout the engine (`f32` or `f64`).
///
/// The bound deliberately avoids `num_traits::Float` so that method calls such
/// as `abs` or `sqrt` resolve unambiguously to the `nalgebra` versions.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count or index into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion to `f64`, used for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the type.
    fn machine_eps() -> Self;
}

impl Real for f32 {
    #[inline]
    fn machine_eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    #[inline]
    fn machine_eps() -> Self {
        f64::EPSILON
    }
}
