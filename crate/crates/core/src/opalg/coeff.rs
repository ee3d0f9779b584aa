//! Coefficient ring: Gaussian-rational combinations of Laurent monomials in
//! scalar symbols (ħ, M, g, …).

use std::collections::BTreeMap;
use std::fmt;

use super::scalar::{ExactScalar, Gauss};

pub type ScalarId = u16;

/// Laurent monomial in scalar symbols, sorted by id, no zero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarMono(Vec<(ScalarId, i32)>);

impl ScalarMono {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(id: ScalarId, exp: i32) -> Self {
        if exp == 0 {
            Self::one()
        } else {
            Self(vec![(id, exp)])
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (ScalarId, i32)>) -> Self {
        let mut m = Self::one();
        for (id, e) in pairs {
            m = m.mul(&Self::var(id, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(ScalarId, i32)] {
        &self.0
    }

    pub fn exponent(&self, id: ScalarId) -> i32 {
        self.0.iter().find(|(s, _)| *s == id).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some(&(a, ea)), Some(&(b, eb))) if a == b => {
                    if ea + eb != 0 {
                        out.push((a, ea + eb));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(&(a, ea)), Some(&(b, _))) if a < b => {
                    out.push((a, ea));
                    i += 1;
                }
                (Some(_), Some(&(b, eb))) => {
                    out.push((b, eb));
                    j += 1;
                }
                (Some(&x), None) => {
                    out.push(x);
                    i += 1;
                }
                (None, Some(&y)) => {
                    out.push(y);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self(out)
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().map(|&(s, e)| (s, -e)).collect())
    }

    pub fn pow(&self, k: i32) -> Self {
        if k == 0 {
            return Self::one();
        }
        Self(self.0.iter().map(|&(s, e)| (s, e * k)).collect())
    }

    /// Square root when every exponent is even.
    pub fn sqrt(&self) -> Option<Self> {
        self.0
            .iter()
            .map(|&(s, e)| (e % 2 == 0).then_some((s, e / 2)))
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    /// Removes `id` and returns its exponent alongside the remainder.
    pub fn split_off(&self, id: ScalarId) -> (i32, Self) {
        let e = self.exponent(id);
        (e, Self(self.0.iter().copied().filter(|(s, _)| *s != id).collect()))
    }
}

/// Sum of `Gauss × ScalarMono` terms. Zero coefficients never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coeff<Q: ExactScalar>(BTreeMap<ScalarMono, Gauss<Q>>);

impl<Q: ExactScalar> Coeff<Q> {
    pub fn zero() -> Self {
        Self(BTreeMap::new())
    }

    pub fn constant(g: Gauss<Q>) -> Self {
        Self::term(g, ScalarMono::one())
    }

    pub fn one() -> Self {
        Self::constant(Gauss::one())
    }

    pub fn int(v: i64) -> Self {
        Self::constant(Gauss::int(v))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(Gauss::ratio(n, d))
    }

    pub fn term(g: Gauss<Q>, m: ScalarMono) -> Self {
        let mut map = BTreeMap::new();
        if !g.is_zero() {
            map.insert(m, g);
        }
        Self(map)
    }

    pub fn var(id: ScalarId) -> Self {
        Self::term(Gauss::one(), ScalarMono::var(id, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ScalarMono, &Gauss<Q>)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, m: ScalarMono, g: Gauss<Q>) {
        if g.is_zero() {
            return;
        }
        match self.0.remove(&m) {
            Some(old) => {
                let s = old + g;
                if !s.is_zero() {
                    self.0.insert(m, s);
                }
            }
            None => {
                self.0.insert(m, g);
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (m, g) in &other.0 {
            self.add_term(m.clone(), g.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|(m, g)| (m.clone(), -g.clone())).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ga) in &self.0 {
            for (mb, gb) in &other.0 {
                out.add_term(ma.mul(mb), ga.clone() * gb.clone());
            }
        }
        out
    }

    pub fn scale(&self, g: &Gauss<Q>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.0 {
            out.add_term(m.clone(), c.clone() * g.clone());
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|(m, g)| (m.clone(), g.conj())).collect())
    }

    /// The single `(g, m)` term, if this coefficient is a monomial.
    pub fn as_monomial(&self) -> Option<(&Gauss<Q>, &ScalarMono)> {
        if self.0.len() == 1 {
            self.0.iter().next().map(|(m, g)| (g, m))
        } else {
            None
        }
    }

    /// Inverse of a monomial coefficient.
    pub fn inverse(&self) -> Option<Self> {
        let (g, m) = self.as_monomial()?;
        Some(Self::term(g.inverse()?, m.inverse()))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Replaces scalar `id` by `value`. Negative powers of `id` need `value`
    /// to be an invertible monomial.
    pub fn substitute(&self, id: ScalarId, value: &Self) -> Option<Self> {
        let mut out = Self::zero();
        for (m, g) in &self.0 {
            let (e, rest) = m.split_off(id);
            let factor = if e >= 0 {
                value.pow(e as u32)
            } else {
                value.inverse()?.pow((-e) as u32)
            };
            out.add_assign(&factor.mul(&Self::term(g.clone(), rest)));
        }
        Some(out)
    }

    /// Highest power of `id` appearing.
    pub fn degree_in(&self, id: ScalarId) -> i32 {
        self.0.keys().map(|m| m.exponent(id)).max().unwrap_or(0)
    }

    /// Part homogeneous of the given degree in `id`.
    pub fn part_of_degree(&self, id: ScalarId, deg: i32) -> Self {
        Self(
            self.0
                .iter()
                .filter(|(m, _)| m.exponent(id) == deg)
                .map(|(m, g)| (m.clone(), g.clone()))
                .collect(),
        )
    }

    /// Numerical value with scalar bindings; `None` if a symbol is unbound.
    pub fn eval(&self, bind: &dyn Fn(ScalarId) -> Option<f64>) -> Option<(f64, f64)> {
        let (mut re, mut im) = (0.0, 0.0);
        for (m, g) in &self.0 {
            let mut v = 1.0;
            for &(s, e) in m.factors() {
                v *= bind(s)?.powi(e);
            }
            let (gr, gi) = g.to_f64_pair();
            re += gr * v;
            im += gi * v;
        }
        Some((re, im))
    }
}

impl<Q: ExactScalar> fmt::Display for Coeff<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, g)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{g}")?;
            for (s, e) in m.factors() {
                write!(f, "*s{s}^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type C = Coeff<BigRational>;

    #[test]
    fn monomials_cancel_exponents() {
        let a = ScalarMono::from_pairs([(0, 2), (1, -1)]);
        let b = ScalarMono::from_pairs([(1, 1)]);
        assert_eq!(a.mul(&b), ScalarMono::var(0, 2));
        assert_eq!(a.mul(&a.inverse()), ScalarMono::one());
        assert_eq!(ScalarMono::var(3, 4).sqrt(), Some(ScalarMono::var(3, 2)));
        assert_eq!(ScalarMono::var(3, 3).sqrt(), None);
    }

    #[test]
    fn sums_drop_zeros() {
        let x = C::var(0);
        assert!(x.sub(&x).is_zero());
        let two = C::int(2);
        assert_eq!(x.add(&x), x.mul(&two));
    }

    #[test]
    fn substitution_closes_alpha_beta() {
        // alpha + beta with beta -> 1 - alpha
        let alpha = C::var(0);
        let beta = C::var(1);
        let sum = alpha.add(&beta);
        let sub = sum.substitute(1, &C::one().sub(&alpha)).unwrap();
        assert_eq!(sub, C::one());
    }

    #[test]
    fn inverse_only_for_monomials() {
        let m = C::term(Gauss::int(2), ScalarMono::var(0, 1));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), C::one());
        assert!(C::var(0).add(&C::one()).inverse().is_none());
    }
}
