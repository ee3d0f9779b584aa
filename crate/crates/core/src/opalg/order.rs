//! Word products with commutator rewriting into canonical order.

use std::collections::btree_map::Entry;
use std::collections::HashMap;

use super::coeff::Coeff;
use super::scalar::ExactScalar;
use super::series::{TermMap, Word};
use super::table::{push_factor, Rule, SymId, SymbolTable};
use super::AlgebraError;

const MAX_DEPTH: usize = 4096;

pub(crate) fn add_term<Q: ExactScalar>(map: &mut TermMap<Q>, key: (i32, Word), c: Coeff<Q>) {
    if c.is_zero() {
        return;
    }
    match map.entry(key) {
        Entry::Occupied(mut e) => {
            let s = e.get().add(&c);
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
        Entry::Vacant(v) => {
            v.insert(c);
        }
    }
}

/// Rewriting context; caches `word · symbol` products for one operation.
pub(crate) struct Orderer<'a, Q: ExactScalar> {
    table: &'a SymbolTable<Q>,
    memo: HashMap<(Word, SymId), TermMap<Q>>,
    depth: usize,
}

impl<'a, Q: ExactScalar> Orderer<'a, Q> {
    pub fn new(table: &'a SymbolTable<Q>) -> Self {
        Self { table, memo: HashMap::new(), depth: 0 }
    }

    fn single(w: Word) -> TermMap<Q> {
        let mut m = TermMap::new();
        m.insert((0, w), Coeff::one());
        m
    }

    /// Normal-ordered `w · s` for a normal-ordered word `w`.
    pub fn mul_sym(&mut self, w: &[(SymId, u32)], s: SymId) -> Result<TermMap<Q>, AlgebraError> {
        let (t, k) = match w.last() {
            None => return Ok(Self::single(vec![(s, 1)])),
            Some(&last) => last,
        };
        if t <= s {
            let mut out = w.to_vec();
            push_factor(&mut out, s, 1);
            return Ok(Self::single(out));
        }
        let key = (w.to_vec(), s);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(AlgebraError::RewriteDepth);
        }
        let prefix = &w[..w.len() - 1];
        let mut out = TermMap::new();

        // W'·t^k·s = (W'·s)·t^k + W'·[t^k, s]
        let left = self.mul_sym(prefix, s)?;
        for ((e, lw), c) in left {
            for ((e2, w2), c2) in self.mul_word(&lw, &[(t, k)])? {
                add_term(&mut out, (e + e2, w2), c.mul(&c2));
            }
        }

        match self.table.rule(s, t)?.clone() {
            Rule::Commute => {}
            Rule::Canonical(c) => {
                // [t^k, s] = -k·[s,t]·t^(k-1) for scalar [s,t]
                let mut pw = prefix.to_vec();
                push_factor(&mut pw, t, k - 1);
                add_term(&mut out, (0, pw), c.scale(&super::scalar::Gauss::int(-(k as i64))));
            }
            Rule::Explicit(r) => {
                // [t^k, s] = Σ_j t^j [t,s] t^(k-1-j), [t,s] = -r
                let neg: TermMap<Q> = r.iter().map(|(key, c)| (key.clone(), c.neg())).collect();
                for j in 0..k {
                    let mut head = prefix.to_vec();
                    push_factor(&mut head, t, j);
                    let mid = self.mul_maps(&Self::single(head), &neg)?;
                    let tail = Self::single(if k - 1 - j > 0 { vec![(t, k - 1 - j)] } else { vec![] });
                    for (key, c) in self.mul_maps(&mid, &tail)? {
                        add_term(&mut out, key, c);
                    }
                }
            }
        }
        self.depth -= 1;
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    /// Normal-ordered `w · rhs` where `rhs` is an arbitrary factor sequence.
    pub fn mul_word(&mut self, w: &[(SymId, u32)], rhs: &[(SymId, u32)]) -> Result<TermMap<Q>, AlgebraError> {
        let mut acc = Self::single(w.to_vec());
        for &(s, k) in rhs {
            for _ in 0..k {
                let mut next = TermMap::new();
                for ((e, aw), c) in &acc {
                    for ((e2, w2), c2) in self.mul_sym(aw, s)? {
                        add_term(&mut next, (e + e2, w2), c.mul(&c2));
                    }
                }
                acc = next;
            }
        }
        Ok(acc)
    }

    pub fn mul_maps(&mut self, a: &TermMap<Q>, b: &TermMap<Q>) -> Result<TermMap<Q>, AlgebraError> {
        let mut out = TermMap::new();
        for ((ea, wa), ca) in a {
            for ((eb, wb), cb) in b {
                let cab = ca.mul(cb);
                for ((e, w), c) in self.mul_word(wa, wb)? {
                    add_term(&mut out, (ea + eb + e, w), cab.mul(&c));
                }
            }
        }
        Ok(out)
    }
}
