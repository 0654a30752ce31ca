//! Numeric back-ends for closed-form computations.
//!
//! Every exact computation is generic over [`Scalar`]. `f64` gives the fast
//! floating path; [`Rational`] gives bit-exact answers for specs whose
//! weights were all written as fractions.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::Weight;

pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_count(n: usize) -> Self;
    fn from_weight(w: &Weight) -> Result<Self>;
    fn to_f64(&self) -> f64;

    /// True when the value is zero for all practical purposes: exactly zero
    /// for rationals, `|x| <= 1e-12` for floats.
    fn is_negligible(&self) -> bool;

    /// Deterministic left-to-right sum. The floating implementation is
    /// Neumaier-compensated.
    fn sum_ordered<I: IntoIterator<Item = Self>>(terms: I) -> Self;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_count(n: usize) -> Self {
        n as f64
    }

    fn from_weight(w: &Weight) -> Result<Self> {
        Ok(w.value())
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-12
    }

    fn sum_ordered<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let mut acc = NeumaierSum::default();
        for t in terms {
            acc.add(t);
        }
        acc.value()
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_count(n: usize) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_weight(w: &Weight) -> Result<Self> {
        w.exact().cloned().ok_or(Error::NotExact)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn sum_ordered<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms.into_iter().fold(<Rational as Zero>::zero(), |acc, t| acc + t)
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Parse `"p/q"`, `"p"` or a decimal literal such as `"0.25"` into an exact
/// rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Ok(r) = text.parse::<Rational>() {
        return Some(r);
    }
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(Rational::new(numer * sign, denom))
}

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_small_terms() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(f64::sum_ordered(terms), 2.0);
        assert_eq!(terms.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn parses_fraction_and_decimal_literals() {
        assert_eq!(parse_rational("4/5"), Some(rational(4, 5)));
        assert_eq!(parse_rational("0.25"), Some(rational(1, 4)));
        assert_eq!(parse_rational("-.5"), Some(rational(-1, 2)));
        assert_eq!(parse_rational(" 3 "), Some(rational(3, 1)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn huge_rationals_convert_to_finite_floats() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let r = Rational::new(big.clone() * 3 + 1, big * 4);
        assert!((Scalar::to_f64(&r) - 0.75).abs() < 1e-15);
    }
}
