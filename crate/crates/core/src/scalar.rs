//! Scalar abstraction shared by every kinematics and dynamics routine.
//!
//! All math in this crate is written against [`Real`] so the same code runs
//! in `f64` (the default), `f32`, and [`Dual`](crate::autodiff::Dual) for
//! forward-mode derivatives.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

/// A real-valued scalar the library can compute with.
///
/// `value` exposes the primal part. Branching decisions (pivoting, clamping)
/// are taken on the primal value only, so derivatives stay those of the
/// selected branch.
pub trait Real:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Sum
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    fn from_f64(x: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn acos(self) -> Self;
    fn atan2(self, x: Self) -> Self;

    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    #[inline]
    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Machine epsilon of the underlying float type.
    fn epsilon() -> f64;
}

macro_rules! impl_real_float {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            #[inline]
            fn value(self) -> f64 {
                self as f64
            }
            #[inline]
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            #[inline]
            fn sin_cos(self) -> (Self, Self) {
                <$t>::sin_cos(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn acos(self) -> Self {
                <$t>::acos(self)
            }
            #[inline]
            fn atan2(self, x: Self) -> Self {
                <$t>::atan2(self, x)
            }
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            #[inline]
            fn epsilon() -> f64 {
                <$t>::EPSILON as f64
            }
        }
    };
}

impl_real_float!(f64);
impl_real_float!(f32);

/// Lifts a slice of `f64` into any scalar type.
pub fn lift<T: Real>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::from_f64(x)).collect()
}

/// Primal values of a slice of scalars.
pub fn values<T: Real>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|x| x.value()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f32_roundtrip() {
        let x = <f32 as Real>::from_f64(0.25);
        assert_eq!(x.value(), 0.25);
        assert_eq!(Real::abs(-2.0f64), 2.0);
    }
}
