//! Laurent series in ε = 1/c² with normal-ordered operator coefficients.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::coeff::{Coeff, ScalarId};
use super::order::{add_term, Orderer};
use super::scalar::{ExactScalar, Gauss};
use super::table::{SymId, SymbolTable};
use super::AlgebraError;

/// Factor sequence `(symbol, power)`, strictly increasing in symbol id.
pub type Word = Vec<(SymId, u32)>;
/// Terms keyed by `(ε exponent, word)`.
pub type TermMap<Q> = BTreeMap<(i32, Word), Coeff<Q>>;

#[derive(Clone, Debug)]
pub struct OperatorSeries<Q: ExactScalar> {
    table: Arc<SymbolTable<Q>>,
    terms: TermMap<Q>,
    /// Highest ε order known exactly; `None` for exact expressions.
    precision: Option<i32>,
    truncated: bool,
}

fn min_opt(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<Q: ExactScalar> PartialEq for OperatorSeries<Q> {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl<Q: ExactScalar> OperatorSeries<Q> {
    pub fn zero(table: &Arc<SymbolTable<Q>>) -> Self {
        Self { table: table.clone(), terms: TermMap::new(), precision: None, truncated: false }
    }

    pub fn scalar(table: &Arc<SymbolTable<Q>>, c: Coeff<Q>) -> Self {
        Self::monomial(table, 0, Vec::new(), c)
    }

    pub fn one(table: &Arc<SymbolTable<Q>>) -> Self {
        Self::scalar(table, Coeff::one())
    }

    /// `ε^k`.
    pub fn eps(table: &Arc<SymbolTable<Q>>, k: i32) -> Self {
        Self::monomial(table, k, Vec::new(), Coeff::one())
    }

    pub fn symbol(table: &Arc<SymbolTable<Q>>, id: SymId) -> Self {
        Self::monomial(table, 0, vec![(id, 1)], Coeff::one())
    }

    pub fn named(table: &Arc<SymbolTable<Q>>, name: &str) -> Result<Self, AlgebraError> {
        let id = table.symbol(name).ok_or_else(|| AlgebraError::UnknownSymbol(name.to_string()))?;
        Ok(Self::symbol(table, id))
    }

    /// Scalar symbol as a central series.
    pub fn scalar_named(table: &Arc<SymbolTable<Q>>, name: &str) -> Result<Self, AlgebraError> {
        let id = table.scalar(name).ok_or_else(|| AlgebraError::UnknownSymbol(name.to_string()))?;
        Ok(Self::scalar(table, Coeff::var(id)))
    }

    /// A single term whose word is already normal ordered.
    pub fn monomial(table: &Arc<SymbolTable<Q>>, eps: i32, word: Word, c: Coeff<Q>) -> Self {
        let mut terms = TermMap::new();
        add_term(&mut terms, (eps, word), c);
        Self { table: table.clone(), terms, precision: None, truncated: false }
    }

    /// `c · ε^eps · s1^k1 · s2^k2 ⋯` in the given (arbitrary) order.
    pub fn product_of(
        table: &Arc<SymbolTable<Q>>,
        eps: i32,
        factors: &[(SymId, u32)],
        c: Coeff<Q>,
    ) -> Result<Self, AlgebraError> {
        let mut ord = Orderer::new(table);
        let ordered = ord.mul_word(&[], factors)?;
        let mut terms = TermMap::new();
        for ((e, w), c2) in ordered {
            add_term(&mut terms, (eps + e, w), c.mul(&c2));
        }
        Ok(Self { table: table.clone(), terms, precision: None, truncated: false })
    }

    /// Builds from canonical terms, normal ordering each word.
    pub fn from_terms(table: &Arc<SymbolTable<Q>>, terms: TermMap<Q>) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(table);
        for ((e, w), c) in terms {
            out = out.add(&Self::product_of(table, e, &w, c)?)?;
        }
        Ok(out)
    }

    pub fn table(&self) -> &Arc<SymbolTable<Q>> {
        &self.table
    }

    pub fn terms(&self) -> &TermMap<Q> {
        &self.terms
    }

    pub fn precision(&self) -> Option<i32> {
        self.precision
    }

    /// Whether terms were dropped by truncation at some point.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest ε exponent present.
    pub fn min_eps(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.0).min()
    }

    pub fn max_eps(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.0).max()
    }

    fn check_table(&self, other: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.table, &other.table) {
            Ok(())
        } else {
            Err(AlgebraError::TableMismatch)
        }
    }

    fn with_terms(&self, terms: TermMap<Q>, precision: Option<i32>, truncated: bool) -> Self {
        let mut out = Self { table: self.table.clone(), terms, precision, truncated };
        out.enforce_precision();
        out
    }

    fn enforce_precision(&mut self) {
        if let Some(k) = self.precision {
            let before = self.terms.len();
            self.terms.retain(|key, _| key.0 <= k);
            if self.terms.len() != before {
                self.truncated = true;
            }
        }
    }

    /// Drops ε orders above `k` and records the precision.
    pub fn truncate(&self, k: i32) -> Self {
        let mut out = self.clone();
        out.precision = min_opt(out.precision, Some(k));
        out.enforce_precision();
        out
    }

    /// Same terms, marked exact. For closed-form inputs only.
    pub fn exact(&self) -> Self {
        let mut out = self.clone();
        out.precision = None;
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_table(other)?;
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            add_term(&mut terms, k.clone(), c.clone());
        }
        Ok(self.with_terms(
            terms,
            min_opt(self.precision, other.precision),
            self.truncated || other.truncated,
        ))
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect();
        Self { terms, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Coeff<Q>) -> Self {
        let mut terms = TermMap::new();
        for (k, v) in &self.terms {
            add_term(&mut terms, k.clone(), v.mul(c));
        }
        Self { terms, ..self.clone() }
    }

    pub fn scale_gauss(&self, g: &Gauss<Q>) -> Self {
        self.scale(&Coeff::constant(g.clone()))
    }

    /// Multiplies by `ε^k`.
    pub fn shift_eps(&self, k: i32) -> Self {
        let terms = self.terms.iter().map(|((e, w), c)| ((e + k, w.clone()), c.clone())).collect();
        Self {
            terms,
            precision: self.precision.map(|p| p + k),
            table: self.table.clone(),
            truncated: self.truncated,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_table(other)?;
        let precision = product_precision(self, other);
        let mut ord = Orderer::new(&self.table);
        let mut terms = TermMap::new();
        let mut dropped = false;
        for ((ea, wa), ca) in &self.terms {
            for ((eb, wb), cb) in &other.terms {
                // rules never lower the ε order
                if precision.is_some_and(|p| ea + eb > p) {
                    dropped = true;
                    continue;
                }
                let cab = ca.mul(cb);
                for ((e, w), c) in ord.mul_word(wa, wb)? {
                    add_term(&mut terms, (ea + eb + e, w), cab.mul(&c));
                }
            }
        }
        Ok(self.with_terms(terms, precision, self.truncated || other.truncated || dropped))
    }

    pub fn pow(&self, n: u32) -> Result<Self, AlgebraError> {
        let mut out = Self::one(&self.table);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Terms with a nonempty word.
    pub fn noncentral(&self) -> Self {
        let terms = self.terms.iter().filter(|(k, _)| !k.1.is_empty()).map(|(k, c)| (k.clone(), c.clone())).collect();
        Self { terms, ..self.clone() }
    }

    /// `[a, b] = ab − ba`. Central terms are dropped first so that a rest
    /// energy at ε⁻¹ does not cost precision.
    pub fn commutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        let (a, b) = (self.noncentral(), other.noncentral());
        a.mul(&b)?.sub(&b.mul(&a)?)
    }

    /// `{a, b} = ab + ba`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    /// Reverses factor order, conjugates coefficients, re-orders. All
    /// operator symbols are self-adjoint.
    pub fn adjoint(&self) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(&self.table);
        for ((e, w), c) in &self.terms {
            let rev: Word = w.iter().rev().copied().collect();
            out = out.add(&Self::product_of(&self.table, *e, &rev, c.conj())?)?;
        }
        out.precision = self.precision;
        out.truncated = self.truncated;
        Ok(out)
    }

    /// Re-derives the canonical form of every word. Idempotent.
    pub fn normal_order(&self) -> Result<Self, AlgebraError> {
        let mut out = Self::from_terms(&self.table, self.terms.clone())?;
        out.precision = self.precision;
        out.truncated = self.truncated;
        out.enforce_precision();
        Ok(out)
    }

    /// Exact comparison of canonical forms and precisions.
    pub fn equals(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.table, &other.table) && self.terms == other.terms && self.precision == other.precision
    }

    /// Replaces operator symbol `sym` by `repl` and re-normal-orders.
    pub fn substitute(&self, sym: SymId, repl: &Self) -> Result<Self, AlgebraError> {
        self.check_table(repl)?;
        let mut out = Self::zero(&self.table);
        out.precision = self.precision;
        out.truncated = self.truncated;
        for ((e, w), c) in &self.terms {
            let mut acc = Self::monomial(&self.table, *e, Vec::new(), c.clone());
            for &(s, k) in w {
                let f = if s == sym { repl.pow(k)? } else { Self::monomial(&self.table, 0, vec![(s, k)], Coeff::one()) };
                acc = acc.mul(&f)?;
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    pub fn substitute_named(&self, name: &str, repl: &Self) -> Result<Self, AlgebraError> {
        let id = self.table.symbol(name).ok_or_else(|| AlgebraError::UnknownSymbol(name.to_string()))?;
        self.substitute(id, repl)
    }

    /// Replaces scalar `id` by a coefficient.
    pub fn substitute_scalar(&self, id: ScalarId, value: &Coeff<Q>) -> Result<Self, AlgebraError> {
        let mut terms = TermMap::new();
        for (k, c) in &self.terms {
            let v = c.substitute(id, value).ok_or_else(|| {
                AlgebraError::NotInvertible(format!("{} has negative powers", self.table.scalar_name(id)))
            })?;
            add_term(&mut terms, k.clone(), v);
        }
        Ok(Self { terms, ..self.clone() })
    }

    /// Terms at `ε^k`, moved to ε⁰.
    pub fn eps_coefficient(&self, k: i32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(key, _)| key.0 == k)
            .map(|((_, w), c)| ((0, w.clone()), c.clone()))
            .collect();
        Self { table: self.table.clone(), terms, precision: None, truncated: false }
    }

    /// Part of homogeneous degree `deg` in scalar `id`.
    pub fn scalar_degree_part(&self, id: ScalarId, deg: i32) -> Self {
        let mut terms = TermMap::new();
        for (k, c) in &self.terms {
            add_term(&mut terms, k.clone(), c.part_of_degree(id, deg));
        }
        Self { terms, ..self.clone() }
    }

    /// Removes central terms at negative ε orders (the rest energy).
    pub fn drop_rest_energy(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|((e, w), _)| !(w.is_empty() && *e < 0))
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        Self { terms, ..self.clone() }
    }

    /// True when no terms remain at ε orders ≤ `order` and the series is
    /// known at least that far.
    pub fn vanishes_through(&self, order: i32) -> bool {
        self.precision.is_none_or(|p| p >= order) && self.terms.keys().all(|k| k.0 > order)
    }

    /// Operator symbols appearing in any word.
    pub fn symbols_used(&self) -> Vec<SymId> {
        let mut v: Vec<SymId> = self.terms.keys().flat_map(|(_, w)| w.iter().map(|f| f.0)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Lowest unknown order of `a·b` minus one.
fn product_precision<Q: ExactScalar>(a: &OperatorSeries<Q>, b: &OperatorSeries<Q>) -> Option<i32> {
    let (va, vb) = (a.min_eps(), b.min_eps());
    let mut bound: Option<i32> = None;
    if let (Some(ka), Some(v)) = (a.precision, vb) {
        bound = min_opt(bound, Some(ka + v));
    }
    if let (Some(kb), Some(v)) = (b.precision, va) {
        bound = min_opt(bound, Some(kb + v));
    }
    if let (Some(ka), Some(kb)) = (a.precision, b.precision) {
        bound = min_opt(bound, Some(ka + kb + 1));
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::table::PhysicsTable;
    use num_rational::BigRational;

    type S = OperatorSeries<BigRational>;

    fn table() -> Arc<SymbolTable<BigRational>> {
        SymbolTable::physics(&PhysicsTable::default())
    }

    fn ihbar() -> Coeff<BigRational> {
        Coeff::term(Gauss::i(), crate::opalg::coeff::ScalarMono::var(0, 1))
    }

    #[test]
    fn single_swap() {
        let t = table();
        let x = S::named(&t, "X").unwrap();
        let px = S::named(&t, "Px").unwrap();
        let lhs = px.mul(&x).unwrap();
        let rhs = x.mul(&px).unwrap().sub(&S::scalar(&t, ihbar())).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn squared_momentum_past_position() {
        let t = table();
        let (x, px) = (t.symbol("X").unwrap(), t.symbol("Px").unwrap());
        let lhs = S::product_of(&t, 0, &[(px, 2), (x, 1)], Coeff::one()).unwrap();
        let expected = S::monomial(&t, 0, vec![(x, 1), (px, 2)], Coeff::one())
            .add(&S::monomial(&t, 0, vec![(px, 1)], ihbar().scale(&Gauss::int(-2))))
            .unwrap();
        assert_eq!(lhs, expected);
    }

    #[test]
    fn commuting_pair_only_reorders() {
        let t = table();
        let (x, h) = (t.symbol("X").unwrap(), t.symbol("Hrel0").unwrap());
        let s = S::product_of(&t, 0, &[(h, 1), (x, 1)], Coeff::one()).unwrap();
        assert_eq!(s.terms().len(), 1);
        assert!(s.terms().contains_key(&(0, vec![(x, 1), (h, 1)])));
    }

    #[test]
    fn anticommutator_of_equal_terms() {
        let t = table();
        let x = S::named(&t, "X").unwrap();
        assert_eq!(x.anticommutator(&x).unwrap(), x.pow(2).unwrap().scale(&Coeff::int(2)));
    }

    #[test]
    fn truncation_drops_and_flags() {
        let t = table();
        let m = S::scalar_named(&t, "M").unwrap().shift_eps(-1);
        let h = S::named(&t, "Hrel1").unwrap().shift_eps(1);
        let s = m.add(&h).unwrap().truncate(0);
        assert_eq!(s.exact(), m);
        assert!(s.is_truncated());
    }

    #[test]
    fn product_precision_tracks_leading_orders() {
        let t = table();
        let a = S::named(&t, "X").unwrap().shift_eps(-1).add(&S::named(&t, "Px").unwrap()).unwrap().truncate(1);
        let b = S::named(&t, "Px").unwrap().truncate(1);
        // a's unknown ε² part times b is ε²; b's unknown ε² part times a's ε⁻¹ leading term is ε¹
        assert_eq!(a.mul(&b).unwrap().precision(), Some(0));
    }

    #[test]
    fn adjoint_of_i_hbar_x_p() {
        let t = table();
        let (x, px) = (t.symbol("X").unwrap(), t.symbol("Px").unwrap());
        let a = S::monomial(&t, 0, vec![(x, 1), (px, 1)], ihbar());
        let expected = S::product_of(&t, 0, &[(px, 1), (x, 1)], ihbar().neg()).unwrap();
        assert_eq!(a.adjoint().unwrap(), expected);
    }

    #[test]
    fn substitution_reorders() {
        let t = table();
        let x = S::named(&t, "X").unwrap();
        let px = S::named(&t, "Px").unwrap();
        let hrel = t.symbol("Hrel").unwrap();
        let xid = t.symbol("X").unwrap();
        let s = S::product_of(&t, 0, &[(hrel, 1), (xid, 1)], Coeff::one()).unwrap();
        let r = s.substitute(hrel, &px).unwrap();
        // applied to the stored canonical form X·Hrel
        assert_eq!(r, x.mul(&px).unwrap());
    }

    #[test]
    fn missing_rule_is_reported() {
        let t = SymbolTable::<BigRational>::physics(&PhysicsTable { internal_commute: false, ..Default::default() });
        let a = S::named(&t, "Cint").unwrap();
        let b = S::named(&t, "Hrel0").unwrap();
        let err = a.mul(&b).unwrap_err();
        assert!(matches!(err, AlgebraError::MissingRule { .. }), "{err}");
    }
}
