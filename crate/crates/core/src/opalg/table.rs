//! Symbol tables: operator symbols in canonical order, their pairwise
//! commutation rules, and the declared scalar symbols.

use std::collections::HashMap;
use std::sync::Arc;

use super::coeff::{Coeff, ScalarId, ScalarMono};
use super::scalar::{ExactScalar, Gauss};
use super::series::{TermMap, Word};
use super::AlgebraError;

pub type SymId = u16;

/// Canonical-order blocks. Symbols are ordered by sector first, then by
/// declaration order inside a sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sector {
    CmPosition,
    CmMomentum,
    ParticlePosition,
    ParticleMomentum,
    Internal,
}

#[derive(Clone, Debug)]
pub struct OpSymbol {
    pub name: String,
    pub sector: Sector,
}

/// Commutator `[a, b]` for `a` before `b` in canonical order.
#[derive(Clone, Debug)]
pub enum Rule<Q: ExactScalar> {
    Commute,
    /// `[a, b] = c · 1` for a scalar coefficient `c` (e.g. iħ).
    Canonical(Coeff<Q>),
    /// `[a, b]` equal to a normal-ordered operator expression.
    Explicit(TermMap<Q>),
}

#[derive(Debug)]
pub struct SymbolTable<Q: ExactScalar> {
    symbols: Vec<OpSymbol>,
    by_name: HashMap<String, SymId>,
    scalars: Vec<String>,
    scalar_by_name: HashMap<String, ScalarId>,
    rules: HashMap<(SymId, SymId), Rule<Q>>,
    aliases: HashMap<String, Vec<SymId>>,
}

impl<Q: ExactScalar> SymbolTable<Q> {
    pub fn symbols(&self) -> &[OpSymbol] {
        &self.symbols
    }

    pub fn scalars(&self) -> &[String] {
        &self.scalars
    }

    pub fn symbol(&self, name: &str) -> Option<SymId> {
        self.by_name.get(name).copied()
    }

    pub fn scalar(&self, name: &str) -> Option<ScalarId> {
        self.scalar_by_name.get(name).copied()
    }

    pub fn name(&self, id: SymId) -> &str {
        &self.symbols[id as usize].name
    }

    pub fn sector(&self, id: SymId) -> Sector {
        self.symbols[id as usize].sector
    }

    pub fn scalar_name(&self, id: ScalarId) -> &str {
        &self.scalars[id as usize]
    }

    /// Vector alias components (e.g. `P` → `Px, Py, Pz`).
    pub fn alias(&self, name: &str) -> Option<&[SymId]> {
        self.aliases.get(name).map(Vec::as_slice)
    }

    /// The rule for `[a, b]` with `a < b`.
    pub fn rule(&self, a: SymId, b: SymId) -> Result<&Rule<Q>, AlgebraError> {
        debug_assert!(a < b);
        self.rules.get(&(a, b)).ok_or_else(|| AlgebraError::MissingRule {
            a: self.name(a).to_string(),
            b: self.name(b).to_string(),
        })
    }

    /// Every declared pair with its rule.
    pub fn declared_rules(&self) -> impl Iterator<Item = (SymId, SymId, &Rule<Q>)> {
        let mut keys: Vec<_> = self.rules.keys().copied().collect();
        keys.sort();
        keys.into_iter().map(move |k| (k.0, k.1, &self.rules[&k]))
    }

    pub fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b)
    }

    /// Default physics table.
    pub fn physics(opts: &PhysicsTable) -> Arc<Self> {
        physics_builder(opts).build().expect("physics table is well formed")
    }
}

/// Options for the built-in physics table.
#[derive(Clone, Debug)]
pub struct PhysicsTable {
    /// 1 (x only) or 3.
    pub dims: usize,
    /// Single particles with their own positions and momenta.
    pub particles: usize,
    /// `[Hrel0, Hrel1] = 0` when true; otherwise the commutator is the opaque
    /// internal symbol `Cint`.
    pub internal_commute: bool,
}

impl Default for PhysicsTable {
    fn default() -> Self {
        Self { dims: 3, particles: 2, internal_commute: true }
    }
}

/// Scalars present in every physics table.
pub const PHYSICS_SCALARS: &[&str] =
    &["hbar", "M", "g", "omega", "lambda", "alpha", "beta", "wcm", "xb", "u1"];

pub fn physics_builder<Q: ExactScalar>(opts: &PhysicsTable) -> SymbolTableBuilder<Q> {
    assert!(opts.dims == 1 || opts.dims == 3, "dims must be 1 or 3");
    let axes: &[&str] = if opts.dims == 3 { &["x", "y", "z"] } else { &["x"] };
    let cm_pos: &[&str] = if opts.dims == 3 { &["X", "Y", "Z"] } else { &["X"] };
    let mut b = SymbolTableBuilder::new();
    for s in PHYSICS_SCALARS {
        b = b.scalar(s);
    }
    for mu in 1..=opts.particles {
        b = b.scalar(&format!("m{mu}"));
    }
    let ihbar = Coeff::term(Gauss::i(), ScalarMono::var(0, 1));

    let mut all: Vec<String> = Vec::new();
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut moms = Vec::new();
    for (k, ax) in axes.iter().enumerate() {
        let p = format!("P{ax}");
        b = b.operator(cm_pos[k], Sector::CmPosition);
        moms.push(p.clone());
        pairs.push((cm_pos[k].to_string(), p));
    }
    for p in &moms {
        b = b.operator(p, Sector::CmMomentum);
    }
    all.extend(cm_pos.iter().map(|s| s.to_string()));
    all.extend(moms.iter().cloned());
    b = b.alias("P", &moms.iter().map(String::as_str).collect::<Vec<_>>());

    for mu in 1..=opts.particles {
        let mut ps = Vec::new();
        for ax in axes {
            let r = format!("{ax}{mu}");
            let p = format!("p{ax}{mu}");
            b = b.operator(&r, Sector::ParticlePosition).operator(&p, Sector::ParticleMomentum);
            pairs.push((r.clone(), p.clone()));
            all.push(r);
            ps.push(p.clone());
            all.push(p);
        }
        b = b.alias(&format!("p{mu}"), &ps.iter().map(String::as_str).collect::<Vec<_>>());
    }

    let mut internal = vec!["Hrel", "Hrel0", "Hrel1"];
    if !opts.internal_commute {
        internal.push("Cint");
    }
    for s in &internal {
        b = b.operator(s, Sector::Internal);
    }

    for (i, a) in all.iter().enumerate() {
        for c in &all[i + 1..] {
            let canonical = pairs.iter().any(|(x, p)| (x == a && p == c) || (x == c && p == a));
            b = if canonical {
                b.canonical(a, c, ihbar.clone())
            } else {
                b.commute(a, c)
            };
        }
        for s in &internal {
            b = b.commute(a, s);
        }
    }
    b = b.commute("Hrel", "Hrel0").commute("Hrel", "Hrel1");
    if opts.internal_commute {
        b = b.commute("Hrel0", "Hrel1");
    } else {
        b = b.commute("Hrel", "Cint").explicit_symbol("Hrel0", "Hrel1", "Cint");
    }
    b
}

enum PendingRule<Q: ExactScalar> {
    Commute,
    Canonical(Coeff<Q>),
    Symbol(String),
}

/// Declares symbols and rules by name; ids follow the canonical order.
pub struct SymbolTableBuilder<Q: ExactScalar> {
    symbols: Vec<OpSymbol>,
    scalars: Vec<String>,
    rules: Vec<(String, String, PendingRule<Q>)>,
    aliases: Vec<(String, Vec<String>)>,
}

impl<Q: ExactScalar> Default for SymbolTableBuilder<Q> {
    fn default() -> Self {
        Self::new()
    }
}

impl<Q: ExactScalar> SymbolTableBuilder<Q> {
    pub fn new() -> Self {
        Self { symbols: Vec::new(), scalars: Vec::new(), rules: Vec::new(), aliases: Vec::new() }
    }

    pub fn operator(mut self, name: &str, sector: Sector) -> Self {
        self.symbols.push(OpSymbol { name: name.to_string(), sector });
        self
    }

    pub fn scalar(mut self, name: &str) -> Self {
        self.scalars.push(name.to_string());
        self
    }

    pub fn commute(mut self, a: &str, b: &str) -> Self {
        self.rules.push((a.into(), b.into(), PendingRule::Commute));
        self
    }

    /// `[a, b] = value` (scalar).
    pub fn canonical(mut self, a: &str, b: &str, value: Coeff<Q>) -> Self {
        self.rules.push((a.into(), b.into(), PendingRule::Canonical(value)));
        self
    }

    /// `[a, b] = sym` for another operator symbol.
    pub fn explicit_symbol(mut self, a: &str, b: &str, sym: &str) -> Self {
        self.rules.push((a.into(), b.into(), PendingRule::Symbol(sym.into())));
        self
    }

    pub fn alias(mut self, name: &str, parts: &[&str]) -> Self {
        self.aliases.push((name.into(), parts.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn build(self) -> Result<Arc<SymbolTable<Q>>, AlgebraError> {
        let mut symbols = self.symbols;
        // stable: declaration order kept within a sector
        symbols.sort_by_key(|s| s.sector);
        let mut by_name = HashMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if by_name.insert(s.name.clone(), i as SymId).is_some() {
                return Err(AlgebraError::Invalid(format!("duplicate symbol {}", s.name)));
            }
        }
        let mut scalar_by_name = HashMap::new();
        for (i, s) in self.scalars.iter().enumerate() {
            if by_name.contains_key(s) || scalar_by_name.insert(s.clone(), i as ScalarId).is_some() {
                return Err(AlgebraError::Invalid(format!("duplicate scalar {s}")));
            }
        }
        let lookup = |n: &str| -> Result<SymId, AlgebraError> {
            by_name.get(n).copied().ok_or_else(|| AlgebraError::UnknownSymbol(n.to_string()))
        };
        let mut rules = HashMap::new();
        for (a, b, r) in self.rules {
            let (ia, ib) = (lookup(&a)?, lookup(&b)?);
            if ia == ib {
                return Err(AlgebraError::Invalid(format!("rule for {a} with itself")));
            }
            // [b, a] = -[a, b]
            let (lo, hi, sign) = if ia < ib { (ia, ib, 1) } else { (ib, ia, -1) };
            let rule = match r {
                PendingRule::Commute => Rule::Commute,
                PendingRule::Canonical(c) => Rule::Canonical(c.scale(&Gauss::int(sign))),
                PendingRule::Symbol(s) => {
                    let id = lookup(&s)?;
                    let mut t = TermMap::new();
                    t.insert((0, vec![(id, 1)]), Coeff::int(sign));
                    Rule::Explicit(t)
                }
            };
            if rules.insert((lo, hi), rule).is_some() {
                return Err(AlgebraError::Invalid(format!("two rules for ({a}, {b})")));
            }
        }
        let mut aliases = HashMap::new();
        for (name, parts) in self.aliases {
            let ids = parts.iter().map(|p| lookup(p)).collect::<Result<Vec<_>, _>>()?;
            aliases.insert(name, ids);
        }
        Ok(Arc::new(SymbolTable {
            symbols,
            by_name,
            scalars: self.scalars,
            scalar_by_name,
            rules,
            aliases,
        }))
    }
}

/// Normal-ordered word helper: appends a factor, merging equal symbols.
pub(crate) fn push_factor(w: &mut Word, s: SymId, k: u32) {
    if k == 0 {
        return;
    }
    match w.last_mut() {
        Some((t, e)) if *t == s => *e += k,
        _ => w.push((s, k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn canonical_order_follows_sectors() {
        let t = SymbolTable::<BigRational>::physics(&PhysicsTable::default());
        let x = t.symbol("X").unwrap();
        let px = t.symbol("Px").unwrap();
        let x1 = t.symbol("x1").unwrap();
        let px1 = t.symbol("px1").unwrap();
        let h0 = t.symbol("Hrel0").unwrap();
        assert!(x < px && px < x1 && x1 < px1 && px1 < h0);
        assert!(t.symbol("Pz").unwrap() < t.symbol("x1").unwrap());
        assert_eq!(t.alias("P").unwrap().len(), 3);
    }

    #[test]
    fn every_pair_has_a_rule() {
        let t = SymbolTable::<BigRational>::physics(&PhysicsTable::default());
        let n = t.symbols().len() as SymId;
        for a in 0..n {
            for b in a + 1..n {
                assert!(t.rule(a, b).is_ok(), "{} {}", t.name(a), t.name(b));
            }
        }
    }

    #[test]
    fn opaque_internal_commutator_leaves_gaps() {
        let t = SymbolTable::<BigRational>::physics(&PhysicsTable {
            internal_commute: false,
            ..Default::default()
        });
        let h0 = t.symbol("Hrel0").unwrap();
        let h1 = t.symbol("Hrel1").unwrap();
        let c = t.symbol("Cint").unwrap();
        assert!(matches!(t.rule(h0, h1).unwrap(), Rule::Explicit(_)));
        assert!(matches!(t.rule(h0, c), Err(AlgebraError::MissingRule { .. })));
    }
}
