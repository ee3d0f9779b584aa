//! Canonical text form of series.
//!
//! One printed term per `(ε order, word, scalar monomial)`, sorted by that
//! key and joined with ` + `:
//!
//! ```text
//! (-1/8)*M^-3 * eps^1 * Px^4 + (0+1/1i)*hbar^1 + O(eps^2)
//! ```

use std::fmt;

use super::coeff::Coeff;
use super::scalar::ExactScalar;
use super::series::OperatorSeries;
use super::table::{SymId, SymbolTable};

fn write_mono<Q: ExactScalar>(
    out: &mut String,
    table: &SymbolTable<Q>,
    eps: i32,
    word: &[(SymId, u32)],
    g: &super::scalar::Gauss<Q>,
    m: &super::coeff::ScalarMono,
) {
    out.push_str(&g.to_string());
    for &(s, e) in m.factors() {
        out.push_str(&format!("*{}^{}", table.scalar_name(s), e));
    }
    if eps != 0 {
        out.push_str(&format!(" * eps^{eps}"));
    }
    for &(s, k) in word {
        out.push_str(&format!(" * {}^{}", table.name(s), k));
    }
}

/// Text for one stored term (its coefficient may hold several monomials).
pub fn format_term<Q: ExactScalar>(table: &SymbolTable<Q>, eps: i32, word: &[(SymId, u32)], c: &Coeff<Q>) -> String {
    let mut parts = Vec::new();
    for (m, g) in c.terms() {
        let mut s = String::new();
        write_mono(&mut s, table, eps, word, g, m);
        parts.push(s);
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

pub fn format_canonical<Q: ExactScalar>(a: &OperatorSeries<Q>) -> String {
    let table = a.table();
    let mut parts = Vec::new();
    for ((e, w), c) in a.terms() {
        for (m, g) in c.terms() {
            let mut s = String::new();
            write_mono(&mut s, table, *e, w, g, m);
            parts.push(s);
        }
    }
    if let Some(k) = a.precision() {
        parts.push(format!("O(eps^{})", k + 1));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

impl<Q: ExactScalar> fmt::Display for OperatorSeries<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_canonical(self))
    }
}
