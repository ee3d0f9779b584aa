//! Exact scalar fields and Gaussian rationals over them.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};

/// An exact ordered field usable as the real part of operator coefficients.
///
/// Implemented for arbitrary-precision rationals and for fixed-width rationals.
/// The fixed-width variants overflow on long commutator chains; they exist for
/// quick checks and for property tests that stay small.
pub trait ExactScalar:
    Clone + Ord + Hash + fmt::Debug + Signed + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;
    fn from_ratio(numer: i64, denom: i64) -> Self;
    /// Parses an unsigned decimal integer literal.
    fn parse_integer(digits: &str) -> Option<Self>;
    /// Exact square root when the value is a perfect rational square.
    fn sqrt_exact(&self) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// Always renders as `p/q`, including integers (`3/1`).
    fn fmt_ratio(&self) -> String;
}

macro_rules! impl_fixed_ratio {
    ($int:ty) => {
        impl ExactScalar for Ratio<$int> {
            fn from_i64(v: i64) -> Self {
                Ratio::from_integer(v as $int)
            }
            fn from_ratio(numer: i64, denom: i64) -> Self {
                Ratio::new(numer as $int, denom as $int)
            }
            fn parse_integer(digits: &str) -> Option<Self> {
                digits.parse::<$int>().ok().map(Ratio::from_integer)
            }
            fn sqrt_exact(&self) -> Option<Self> {
                if self.is_negative() {
                    return None;
                }
                let n = self.numer().sqrt();
                let d = self.denom().sqrt();
                (n * n == *self.numer() && d * d == *self.denom()).then(|| Ratio::new(n, d))
            }
            fn to_f64(&self) -> f64 {
                ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
            }
            fn fmt_ratio(&self) -> String {
                format!("{}/{}", self.numer(), self.denom())
            }
        }
    };
}

impl_fixed_ratio!(i64);
impl_fixed_ratio!(i128);

impl ExactScalar for Ratio<BigInt> {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(BigInt::from(v))
    }
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(BigInt::from(numer), BigInt::from(denom))
    }
    fn parse_integer(digits: &str) -> Option<Self> {
        digits.parse::<BigInt>().ok().map(Ratio::from_integer)
    }
    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Ratio::new(n, d))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn fmt_ratio(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// `re + i·im` with exact parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gauss<Q> {
    pub re: Q,
    pub im: Q,
}

impl<Q: ExactScalar> Gauss<Q> {
    pub fn new(re: Q, im: Q) -> Self {
        Self { re, im }
    }
    pub fn real(re: Q) -> Self {
        Self { re, im: Q::zero() }
    }
    pub fn int(v: i64) -> Self {
        Self::real(Q::from_i64(v))
    }
    pub fn ratio(n: i64, d: i64) -> Self {
        Self::real(Q::from_ratio(n, d))
    }
    pub fn i() -> Self {
        Self { re: Q::zero(), im: Q::one() }
    }
    pub fn zero() -> Self {
        Self::real(Q::zero())
    }
    pub fn one() -> Self {
        Self::real(Q::one())
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }
    pub fn scale(&self, k: &Q) -> Self {
        Self { re: self.re.clone() * k.clone(), im: self.im.clone() * k.clone() }
    }
    pub fn inverse(&self) -> Option<Self> {
        let n = self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone();
        if n.is_zero() {
            return None;
        }
        Some(Self { re: self.re.clone() / n.clone(), im: -self.im.clone() / n })
    }
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl<Q: ExactScalar> Add for Gauss<Q> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<Q: ExactScalar> Sub for Gauss<Q> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<Q: ExactScalar> Mul for Gauss<Q> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let re = self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone();
        let im = self.re * o.im + self.im * o.re;
        Self { re, im }
    }
}

impl<Q: ExactScalar> Neg for Gauss<Q> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl<Q: ExactScalar> fmt::Display for Gauss<Q> {
    /// `(p/q)` for reals, `(a+b/ci)` otherwise, with a zero real part written `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "({})", self.re.fmt_ratio());
        }
        let re = if self.re.is_zero() { "0".to_string() } else { self.re.fmt_ratio() };
        let sign = if self.im.is_negative() { "-" } else { "+" };
        write!(f, "({}{}{}i)", re, sign, self.im.abs().fmt_ratio())
    }
}
