//! Guarded square root of a series with a scalar leading square.

use super::coeff::Coeff;
use super::format::format_term;
use super::order::Orderer;
use super::scalar::{ExactScalar, Gauss};
use super::series::OperatorSeries;
use super::AlgebraError;

/// `C(1/2, k)` for k = 0..=n.
fn half_binomials<Q: ExactScalar>(n: usize) -> Vec<Q> {
    let mut out = vec![Q::from_i64(1)];
    for k in 0..n {
        // C(1/2, k+1) = C(1/2, k)·(1/2 − k)/(k + 1)
        let f = Q::from_ratio(1 - 2 * k as i64, 2 * (k as i64 + 1));
        let next = out[k].clone() * f;
        out.push(next);
    }
    out
}

/// `sqrt(a)` through ε order `k`, for `a = s²(1 + B)` with `s` a scalar
/// monomial times identity and pairwise commuting monomials in `B`.
pub fn series_sqrt<Q: ExactScalar>(a: &OperatorSeries<Q>, k: i32) -> Result<OperatorSeries<Q>, AlgebraError> {
    let table = a.table().clone();
    let v = a
        .min_eps()
        .ok_or_else(|| AlgebraError::NoScalarLeadingSquare("argument is zero".into()))?;
    let leading: Vec<_> = a.terms().iter().filter(|(key, _)| key.0 == v).collect();
    let describe = || {
        leading
            .iter()
            .map(|((e, w), c)| format_term(&table, *e, w, c))
            .collect::<Vec<_>>()
            .join(" + ")
    };
    if leading.len() != 1 || !leading[0].0 .1.is_empty() || v % 2 != 0 {
        return Err(AlgebraError::NoScalarLeadingSquare(describe()));
    }
    let (g, m) = leading[0]
        .1
        .as_monomial()
        .ok_or_else(|| AlgebraError::NoScalarLeadingSquare(describe()))?;
    let root = (g.is_real() && g.re.is_positive())
        .then(|| g.re.sqrt_exact())
        .flatten()
        .zip(m.sqrt())
        .ok_or_else(|| AlgebraError::NoScalarLeadingSquare(describe()))?;
    let s_coeff = Coeff::term(Gauss::real(root.0), root.1);
    let s_sq_inv = leading[0].1.inverse().expect("monomial with nonzero coefficient");

    // relative order needed so that s·(…) reaches absolute order k
    let rel = k - v / 2;
    let b = a
        .scale(&s_sq_inv)
        .shift_eps(-v)
        .sub(&OperatorSeries::one(&table))?
        .truncate(rel);

    let mut ord = Orderer::new(&table);
    let keys: Vec<_> = b.terms().iter().collect();
    for (i, ((ea, wa), ca)) in keys.iter().enumerate() {
        for ((eb, wb), cb) in &keys[i + 1..] {
            let ab = ord.mul_word(wa, wb)?;
            let ba = ord.mul_word(wb, wa)?;
            if ab != ba {
                return Err(AlgebraError::AmbiguousSquareRoot {
                    a: format_term(&table, *ea, wa, ca),
                    b: format_term(&table, *eb, wb, cb),
                });
            }
        }
    }

    let n = rel.max(0) as usize;
    let coeffs = half_binomials::<Q>(n);
    let mut sum = OperatorSeries::one(&table).truncate(rel);
    let mut bp = OperatorSeries::one(&table);
    for c in coeffs.iter().skip(1) {
        bp = bp.mul(&b)?;
        if bp.is_zero() {
            break;
        }
        sum = sum.add(&bp.scale(&Coeff::constant(Gauss::real(c.clone()))))?;
    }
    let out = sum.scale(&s_coeff).shift_eps(v / 2);
    let limit = match a.precision() {
        Some(p) => k.min(p - v / 2),
        None => k,
    };
    Ok(out.truncate(limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::table::{PhysicsTable, SymbolTable};
    use num_rational::BigRational;

    type S = OperatorSeries<BigRational>;

    #[test]
    fn binomials() {
        let c = half_binomials::<BigRational>(3);
        assert_eq!(c[1], BigRational::from_ratio(1, 2));
        assert_eq!(c[2], BigRational::from_ratio(-1, 8));
        assert_eq!(c[3], BigRational::from_ratio(1, 16));
    }

    #[test]
    fn perfect_square_scalar() {
        let t = SymbolTable::physics(&PhysicsTable::default());
        let mc2 = S::scalar_named(&t, "M").unwrap().shift_eps(-1);
        let r = series_sqrt(&mc2.pow(2).unwrap(), 1).unwrap();
        assert_eq!(r.exact(), mc2);
    }

    #[test]
    fn operator_leading_term_refused() {
        let t = SymbolTable::physics(&PhysicsTable::default());
        let x = S::named(&t, "X").unwrap();
        let err = series_sqrt(&x.pow(2).unwrap(), 1).unwrap_err();
        assert!(matches!(err, AlgebraError::NoScalarLeadingSquare(_)));
    }

    #[test]
    fn noncommuting_terms_refused() {
        let t = SymbolTable::physics(&PhysicsTable::default());
        let one = S::one(&t);
        let x = S::named(&t, "X").unwrap().shift_eps(1);
        let p = S::named(&t, "Px").unwrap().shift_eps(1);
        let a = one.add(&x).unwrap().add(&p).unwrap();
        let err = series_sqrt(&a, 2).unwrap_err();
        assert!(matches!(err, AlgebraError::AmbiguousSquareRoot { .. }));
    }

    #[test]
    fn square_reproduces_argument() {
        let t = SymbolTable::physics(&PhysicsTable::default());
        let m = S::scalar_named(&t, "M").unwrap();
        let px = S::named(&t, "Px").unwrap();
        let a = m.pow(2).unwrap().shift_eps(-2).add(&px.pow(2).unwrap().shift_eps(-1)).unwrap();
        let r = series_sqrt(&a, 1).unwrap();
        let sq = r.mul(&r).unwrap();
        let p = sq.precision().unwrap();
        assert_eq!(sq.exact(), a.truncate(p).exact());
    }
}
