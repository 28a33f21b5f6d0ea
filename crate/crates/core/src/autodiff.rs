//! Forward-mode differentiation with dual numbers.
//!
//! A [`Dual`] carries a primal value and one tangent. Because every routine in
//! the crate is generic over [`Real`], pushing duals through forward
//! kinematics, RNEA or CRBA yields a Jacobian-vector product in a single
//! evaluation pass, without ever forming the full Jacobian.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("point has length {point} but tangent has length {tangent}")]
    TangentLength { point: usize, tangent: usize },
}

/// First-order dual number `value + tangent·ε` with `ε² = 0`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub tangent: f64,
}

impl Dual {
    #[inline]
    pub const fn new(value: f64, tangent: f64) -> Self {
        Self { value, tangent }
    }

    #[inline]
    pub const fn constant(value: f64) -> Self {
        Self {
            value,
            tangent: 0.0,
        }
    }

    /// Seeds an independent variable (`tangent = 1`).
    #[inline]
    pub const fn variable(value: f64) -> Self {
        Self {
            value,
            tangent: 1.0,
        }
    }
}

impl fmt::Debug for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}+{:?}ε", self.value, self.tangent)
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.tangent + rhs.tangent)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.tangent - rhs.tangent)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.tangent * rhs.value + self.value * rhs.tangent,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        let inv = 1.0 / rhs.value;
        Dual::new(
            self.value * inv,
            (self.tangent * rhs.value - self.value * rhs.tangent) * inv * inv,
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.tangent)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, rhs: Dual) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, rhs: Dual) {
        *self = *self - rhs;
    }
}

impl MulAssign for Dual {
    #[inline]
    fn mul_assign(&mut self, rhs: Dual) {
        *self = *self * rhs;
    }
}

impl DivAssign for Dual {
    #[inline]
    fn div_assign(&mut self, rhs: Dual) {
        *self = *self / rhs;
    }
}

impl Zero for Dual {
    #[inline]
    fn zero() -> Self {
        Dual::constant(0.0)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        self.value == 0.0 && self.tangent == 0.0
    }
}

impl One for Dual {
    #[inline]
    fn one() -> Self {
        Dual::constant(1.0)
    }
}

impl Sum for Dual {
    fn sum<I: Iterator<Item = Dual>>(iter: I) -> Dual {
        iter.fold(Dual::zero(), |a, b| a + b)
    }
}

impl Real for Dual {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dual::constant(x)
    }
    #[inline]
    fn value(self) -> f64 {
        self.value
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        Dual::new(s, self.tangent * c)
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        Dual::new(c, -self.tangent * s)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.value.sin_cos();
        (
            Dual::new(s, self.tangent * c),
            Dual::new(c, -self.tangent * s),
        )
    }
    #[inline]
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        Dual::new(r, self.tangent / (2.0 * r))
    }
    #[inline]
    fn acos(self) -> Self {
        let x = self.value;
        Dual::new(x.acos(), -self.tangent / (1.0 - x * x).sqrt())
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        let (y, xv) = (self.value, x.value);
        let den = xv * xv + y * y;
        Dual::new(y.atan2(xv), (xv * self.tangent - y * x.tangent) / den)
    }
    #[inline]
    fn epsilon() -> f64 {
        f64::EPSILON
    }
}

/// Seeds duals at `x` along direction `v`.
pub fn seed(x: &[f64], v: &[f64]) -> Result<Vec<Dual>, AutodiffError> {
    if x.len() != v.len() {
        return Err(AutodiffError::TangentLength {
            point: x.len(),
            tangent: v.len(),
        });
    }
    Ok(x.iter().zip(v).map(|(&a, &b)| Dual::new(a, b)).collect())
}

/// Jacobian-vector product: returns `(f(x), Df(x)·v)` from one pass of `f`.
pub fn jvp<F>(f: F, x: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>), AutodiffError>
where
    F: Fn(&[Dual]) -> Vec<Dual>,
{
    let out = f(&seed(x, v)?);
    Ok(out.iter().map(|d| (d.value, d.tangent)).unzip())
}

/// JVP of a scalar-valued function.
pub fn jvp_scalar<F>(f: F, x: &[f64], v: &[f64]) -> Result<(f64, f64), AutodiffError>
where
    F: Fn(&[Dual]) -> Dual,
{
    let out = f(&seed(x, v)?);
    Ok((out.value, out.tangent))
}

/// Dense Jacobian from `n` JVP passes with basis tangents.
///
/// Column `j` is `Df(x)·e_j`. Prefer [`jvp`] when only a directional
/// derivative is needed.
pub fn jacobian_fwd<F>(f: F, x: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[Dual]) -> Vec<Dual>,
{
    let n = x.len();
    let mut duals: Vec<Dual> = x.iter().map(|&a| Dual::constant(a)).collect();
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        duals[j].tangent = 1.0;
        columns.push(f(&duals));
        duals[j].tangent = 0.0;
    }
    let m = columns.first().map_or(0, Vec::len);
    DMatrix::from_fn(m, n, |i, j| columns[j][i].tangent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: f64) -> Dual {
        Dual::variable(x)
    }

    #[test]
    fn elementary_derivatives() {
        let x = 0.7;
        let cases: [(Dual, f64); 7] = [
            (d(x) * d(x) * d(x), 3.0 * x * x),
            (Real::sin(d(x)), x.cos()),
            (Real::cos(d(x)), -x.sin()),
            (Real::sqrt(d(x)), 0.5 / x.sqrt()),
            (Real::acos(d(x)), -1.0 / (1.0 - x * x).sqrt()),
            (Dual::one() / d(x), -1.0 / (x * x)),
            (Real::atan2(d(x), Dual::constant(2.0)), 2.0 / (4.0 + x * x)),
        ];
        for (i, (got, want)) in cases.iter().enumerate() {
            assert!(
                (got.tangent - want).abs() < 1e-12,
                "case {i}: {got:?} vs {want}"
            );
        }
    }

    #[test]
    fn abs_follows_branch() {
        let a = Real::abs(Dual::new(-2.0, 3.0));
        assert_eq!(a, Dual::new(2.0, -3.0));
    }

    #[test]
    fn zero_tangent_gives_zero_derivative() {
        let f = |x: &[Dual]| vec![x[0] * x[1], Real::sin(x[0])];
        let (val, tan) = jvp(f, &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(val, vec![2.0, 1.0f64.sin()]);
        assert_eq!(tan, vec![0.0, 0.0]);
    }

    #[test]
    fn mismatched_tangent_rejected() {
        let err = jvp(|x: &[Dual]| x.to_vec(), &[1.0], &[1.0, 2.0]).unwrap_err();
        assert_eq!(
            err,
            AutodiffError::TangentLength {
                point: 1,
                tangent: 2
            }
        );
    }

    #[test]
    fn jacobian_of_identity() {
        let j = jacobian_fwd(|x: &[Dual]| x.to_vec(), &[1.0, -2.0, 3.0]);
        assert_eq!(j, DMatrix::identity(3, 3));
    }
}
