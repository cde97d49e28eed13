//! Scalar abstraction for the numeric core.
//!
//! Everything numeric in this crate (discounting, LP coefficients, the
//! simplex solver, reports) is generic over [`Scalar`]. The crate root
//! exposes concrete `f64` aliases, which are what the CLI and the test
//! suites use; `f32` is supported for callers that trade precision for
//! memory.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar usable throughout the engine.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Sum
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` literals used in formulas.
    fn from_f64_lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal not representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand used in numeric code for `f64` constants.
#[inline]
pub fn lit<S: Scalar>(v: f64) -> S {
    S::from_f64_lit(v)
}
