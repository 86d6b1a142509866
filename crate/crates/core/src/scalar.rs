//! Floating-point abstraction shared by the closed-form and sampling code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the model math is written against: `f32` or `f64`.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal or sample.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count is representable in every Scalar")
    }

    /// `> 0` and finite; false for NaN.
    fn is_positive_finite(self) -> bool {
        self.is_finite() && self > Self::zero()
    }

    /// `>= 0` and finite; false for NaN.
    fn is_nonnegative_finite(self) -> bool {
        self.is_finite() && self >= Self::zero()
    }

    /// Reduce an angle into `[0, 2π)`.
    fn wrap_two_pi(self) -> Self {
        let tau = Self::TAU();
        let r = self % tau;
        let r = if r < Self::zero() { r + tau } else { r };
        // `r + tau` can round up to exactly tau for tiny negative r
        if r >= tau {
            Self::zero()
        } else {
            r
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
