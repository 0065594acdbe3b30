//! Floating-point scalar abstraction used by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the solvers are generic over: `f32` or `f64`.
///
/// Conversions from `f64` are used for literal constants (tolerances,
/// schedule exponents); they are exact for every constant this crate uses
/// in `f64` and rounded once for `f32`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for lossy conversion of an `f64` constant.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant")
    }

    /// Shorthand for converting a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in scalar")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_round_trip() {
        assert_eq!(f64::c(0.25), 0.25);
        assert_eq!(f32::c(0.25), 0.25f32);
        assert_eq!(f64::from_count(7), 7.0);
        assert_eq!(f64::half(), 0.5);
    }
}
