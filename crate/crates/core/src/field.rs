//! Coefficient fields for tensor sequences.
//!
//! Two fields are supported: exact arbitrary-precision rationals and IEEE
//! doubles. Every algebra routine is generic over [`Coefficient`], so the same
//! code path produces exact fixtures and fast float benchmarks.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational coefficient.
pub type Rational = BigRational;

/// Runtime tag for the coefficient field of a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Rational,
    Float64,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Rational => "rational",
            FieldKind::Float64 => "float64",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FieldKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(FieldKind::Rational),
            "float64" | "float" => Ok(FieldKind::Float64),
            other => Err(format!("unknown field `{other}` (expected rational|float64)")),
        }
    }
}

/// Arithmetic needed by the tensor algebra kernels.
///
/// Methods take references so that big rationals are not cloned in the inner
/// loops; for `f64` everything inlines to plain arithmetic.
pub trait Coefficient: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    const FIELD: FieldKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(value: i64) -> Self;
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;

    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;

    fn add_assign_ref(&mut self, other: &Self);
    fn mul_assign_ref(&mut self, other: &Self);
    /// `self += a * b`
    fn mul_add_assign(&mut self, a: &Self, b: &Self);

    fn to_f64(&self) -> f64;

    /// Exact equality for rationals; `|a-b| <= abs + rel * max(|a|,|b|)` for floats.
    fn close_to(&self, other: &Self, rel_tol: f64, abs_tol: f64) -> bool;
}

impl Coefficient for Rational {
    const FIELD: FieldKind = FieldKind::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(value: i64) -> Self {
        Rational::from_integer(BigInt::from(value))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_assign_ref(&mut self, other: &Self) {
        *self *= other;
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        if Zero::is_zero(a) || Zero::is_zero(b) {
            return;
        }
        *self += a * b;
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }
    fn close_to(&self, other: &Self, _rel_tol: f64, _abs_tol: f64) -> bool {
        self == other
    }
}

impl Coefficient for f64 {
    const FIELD: FieldKind = FieldKind::Float64;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_i64(value: i64) -> Self {
        value as f64
    }
    #[inline]
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    #[inline]
    fn is_one(&self) -> bool {
        *self == 1.0
    }
    #[inline]
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    #[inline]
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    #[inline]
    fn negated(&self) -> Self {
        -self
    }
    #[inline]
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    #[inline]
    fn mul_assign_ref(&mut self, other: &Self) {
        *self *= other;
    }
    #[inline]
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }
    fn close_to(&self, other: &Self, rel_tol: f64, abs_tol: f64) -> bool {
        if self == other {
            return true;
        }
        (self - other).abs() <= abs_tol + rel_tol * self.abs().max(other.abs())
    }
}

/// `1 / n!` in the requested field.
pub(crate) fn inverse_factorial<S: Coefficient>(n: usize) -> S {
    let mut acc = S::one();
    for i in 2..=n {
        acc.mul_assign_ref(&S::from_ratio(1, i as i64));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_tolerance_is_symmetric_and_relative() {
        assert!(1.0f64.close_to(&(1.0 + 1e-10), 1e-9, 0.0));
        assert!(!1.0f64.close_to(&1.1, 1e-9, 1e-12));
        assert!(0.0f64.close_to(&1e-13, 0.0, 1e-12));
    }

    #[test]
    fn rational_comparison_ignores_tolerance() {
        let a = Rational::from_ratio(1, 3);
        let b = Rational::from_ratio(1, 3) + Rational::from_ratio(1, 1_000_000_000);
        assert!(!a.close_to(&b, 1.0, 1.0));
        assert!(a.close_to(&Rational::from_ratio(2, 6), 0.0, 0.0));
    }

    #[test]
    fn inverse_factorials() {
        assert_eq!(inverse_factorial::<Rational>(0), Rational::from_i64(1));
        assert_eq!(inverse_factorial::<Rational>(4), Rational::from_ratio(1, 24));
        assert!((inverse_factorial::<f64>(3) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn field_names_parse() {
        assert_eq!("rational".parse::<FieldKind>().unwrap(), FieldKind::Rational);
        assert_eq!("float64".parse::<FieldKind>().unwrap(), FieldKind::Float64);
        assert!("complex".parse::<FieldKind>().is_err());
    }
}
