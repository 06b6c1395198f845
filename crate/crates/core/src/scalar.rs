//! Scalar abstraction shared by every numeric kernel in the crate.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like scalar the solvers compute in.
///
/// Implemented automatically for `f32` and `f64`, and also for exact types
/// such as `num::BigRational`. The exact instantiations are what the test
/// suite uses to cross-check the floating-point kernels against arithmetic
/// with no rounding at all.
pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + PartialOrd + Clone + Debug + Display + 'static
{
    /// Converts an `f64` constant into the scalar type.
    ///
    /// Panics if the value has no representation (for example `NaN` into a
    /// rational). Every binary64 value converts exactly into `BigRational`,
    /// so tolerances written as `f64` literals stay meaningful under exact
    /// arithmetic.
    fn from_f64_lossless(x: f64) -> Self {
        Self::from_f64(x).expect("f64 value not representable in scalar type")
    }

    /// Best-effort conversion back to `f64`, for reporting and logging.
    fn to_f64_approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Signed + FromPrimitive + ToPrimitive + PartialOrd + Clone + Debug + Display + 'static
{
}

/// Maximum of two scalars under `PartialOrd`, biased toward the first.
pub(crate) fn smax<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}
