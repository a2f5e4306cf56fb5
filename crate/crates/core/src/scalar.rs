//! Floating-point scalar abstraction shared by every learner.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar the learners can run on.
///
/// The learners need `exp`/`ln`, so only binary floating-point types qualify.
/// Tolerances are per type: `f32` cannot meet the `f64` residual targets.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Entries of a multiplicative update are floored here before renormalising.
    fn weight_floor() -> Self;
    /// Absolute tolerance on `sum(p) == 1`.
    fn simplex_tolerance() -> Self;
    /// Scaled KKT residual accepted from the FTRL solver.
    fn kkt_tolerance() -> Self;

    /// Converts an `f64` literal. Panics only if the type cannot represent finite `f64`s.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn weight_floor() -> Self {
        1e-300
    }
    fn simplex_tolerance() -> Self {
        1e-9
    }
    fn kkt_tolerance() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn weight_floor() -> Self {
        1e-37
    }
    fn simplex_tolerance() -> Self {
        1e-5
    }
    fn kkt_tolerance() -> Self {
        1e-5
    }
}
