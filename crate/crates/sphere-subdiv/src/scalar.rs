//! Scalar abstraction for the geometric core.
//!
//! Everything geometric is generic over [`Real`], a thin bundle of the
//! `num-traits` capabilities the algorithms actually use. `f32` and `f64`
//! both qualify through the blanket implementation; the crate root exports
//! `f64` aliases for the common case.

use core::fmt;

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the geometry, mean, and scheme layers.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + 'static
{
    /// Converts an `f64` constant (tolerances, mask coefficients) into `Self`.
    ///
    /// Panics if the value is not representable, which cannot happen for the
    /// finite constants this crate feeds it.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant must convert to scalar")
    }

    /// Lossy view of the scalar as `f64`, used for error payloads and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + 'static
{
}
