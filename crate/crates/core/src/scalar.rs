//! Scalar abstraction for the numeric core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the whole crate is generic over.
///
/// Implemented for `f32` and `f64`; the shipped tolerances are calibrated
/// for `f64`, so `f32` instantiations should scale them accordingly.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal (tolerances, algorithm constants).
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("float-to-float conversion cannot fail")
    }

    /// Converts a count into the scalar type.
    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).unwrap_or_else(|| Self::of(v as f64))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
