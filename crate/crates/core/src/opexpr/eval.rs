//! Evaluation of expression trees against a symbol table.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::opalg::{series_sqrt, Coeff, ExactScalar, Gauss, OperatorSeries, SymbolTable};

use super::lexer::Pos;
use super::parser::Expr;
use super::ExprError;

/// Named sub-expressions available to later expressions.
pub type Env<Q> = BTreeMap<String, OperatorSeries<Q>>;

fn first_pos(e: &Expr) -> Pos {
    match e {
        Expr::Num { pos, .. } | Expr::Ident { pos, .. } => *pos,
        Expr::Neg(a) | Expr::Add(a, _) | Expr::Sub(a, _) | Expr::Mul(a, _) => first_pos(a),
        Expr::Div(a, _, _) | Expr::Pow(a, _, _) => first_pos(a),
        Expr::Comm(a, _) | Expr::AComm(a, _) => {
            let p = first_pos(a);
            Pos { line: p.line, col: p.col.saturating_sub(1).max(1) }
        }
        Expr::Sqrt(_, _, pos) => *pos,
        Expr::Order(_) => Pos { line: 1, col: 1 },
    }
}

/// Inverse of a single central monomial term.
fn invert<Q: ExactScalar>(s: &OperatorSeries<Q>) -> Option<OperatorSeries<Q>> {
    if s.len() != 1 {
        return None;
    }
    let ((e, w), c) = s.terms().iter().next()?;
    if !w.is_empty() {
        return None;
    }
    Some(OperatorSeries::scalar(s.table(), c.inverse()?).shift_eps(-e))
}

pub fn eval<Q: ExactScalar>(
    e: &Expr,
    table: &Arc<SymbolTable<Q>>,
    env: &Env<Q>,
) -> Result<OperatorSeries<Q>, ExprError> {
    let alg = |pos: Pos| move |err: crate::opalg::AlgebraError| ExprError::at(pos, err.to_string());
    let here = first_pos(e);
    match e {
        Expr::Num { numer, denom, imag, pos } => {
            let n = Q::parse_integer(numer).ok_or_else(|| ExprError::at(*pos, "bad integer literal"))?;
            let v = match denom {
                Some(d) => {
                    let d = Q::parse_integer(d).ok_or_else(|| ExprError::at(*pos, "bad integer literal"))?;
                    if d.is_zero() {
                        return Err(ExprError::at(*pos, "zero denominator"));
                    }
                    n / d
                }
                None => n,
            };
            let g = if *imag { Gauss::new(Q::zero(), v) } else { Gauss::real(v) };
            Ok(OperatorSeries::scalar(table, Coeff::constant(g)))
        }
        Expr::Ident { name, pos } => ident(name, *pos, table, env),
        Expr::Neg(a) => Ok(eval(a, table, env)?.neg()),
        Expr::Add(a, b) => eval(a, table, env)?.add(&eval(b, table, env)?).map_err(alg(here)),
        Expr::Sub(a, b) => eval(a, table, env)?.sub(&eval(b, table, env)?).map_err(alg(here)),
        Expr::Mul(a, b) => eval(a, table, env)?.mul(&eval(b, table, env)?).map_err(alg(here)),
        Expr::Div(a, b, pos) => {
            let num = eval(a, table, env)?;
            let den = eval(b, table, env)?;
            if den.terms().keys().any(|(_, w)| !w.is_empty()) {
                return Err(ExprError::at(*pos, "division by an operator; only scalar divisors are allowed"));
            }
            let inv = invert(&den)
                .ok_or_else(|| ExprError::at(*pos, "divisor must be a nonzero scalar monomial"))?;
            num.mul(&inv).map_err(alg(*pos))
        }
        Expr::Pow(base, n, pos) => power(base, *n, *pos, table, env),
        Expr::Comm(a, b) => eval(a, table, env)?.commutator(&eval(b, table, env)?).map_err(alg(here)),
        Expr::AComm(a, b) => eval(a, table, env)?.anticommutator(&eval(b, table, env)?).map_err(alg(here)),
        Expr::Sqrt(a, k, pos) => series_sqrt(&eval(a, table, env)?, *k).map_err(alg(*pos)),
        Expr::Order(k) => Ok(OperatorSeries::zero(table).truncate(k - 1)),
    }
}

fn ident<Q: ExactScalar>(
    name: &str,
    pos: Pos,
    table: &Arc<SymbolTable<Q>>,
    env: &Env<Q>,
) -> Result<OperatorSeries<Q>, ExprError> {
    if let Some(s) = env.get(name) {
        return Ok(s.clone());
    }
    if let Some(id) = table.symbol(name) {
        return Ok(OperatorSeries::symbol(table, id));
    }
    if let Some(parts) = table.alias(name) {
        if parts.len() == 1 {
            return Ok(OperatorSeries::symbol(table, parts[0]));
        }
        return Err(ExprError::at(pos, format!("vector '{name}' must appear as an even power such as {name}^2")));
    }
    if let Some(id) = table.scalar(name) {
        return Ok(OperatorSeries::scalar(table, Coeff::var(id)));
    }
    match name {
        "eps" => Ok(OperatorSeries::eps(table, 1)),
        "i" => Ok(OperatorSeries::scalar(table, Coeff::constant(Gauss::i()))),
        "c" => Err(ExprError::at(pos, "c may only appear as an even power (c^2 = 1/eps)")),
        _ => Err(ExprError::at(pos, format!("unknown symbol '{name}'"))),
    }
}

fn power<Q: ExactScalar>(
    base: &Expr,
    n: i32,
    pos: Pos,
    table: &Arc<SymbolTable<Q>>,
    env: &Env<Q>,
) -> Result<OperatorSeries<Q>, ExprError> {
    let alg = |err: crate::opalg::AlgebraError| ExprError::at(pos, err.to_string());
    if let Expr::Ident { name, .. } = base {
        let shadowed = env.contains_key(name) || table.symbol(name).is_some();
        if !shadowed {
            if let Some(parts) = table.alias(name).filter(|p| p.len() > 1) {
                if n < 0 || n % 2 != 0 {
                    return Err(ExprError::at(pos, format!("vector '{name}' needs a nonnegative even power")));
                }
                let mut sq = OperatorSeries::zero(table);
                for &p in parts {
                    sq = sq.add(&OperatorSeries::monomial(table, 0, vec![(p, 2)], Coeff::one())).map_err(alg)?;
                }
                return sq.pow((n / 2) as u32).map_err(alg);
            }
            if name == "c" && table.scalar("c").is_none() {
                if n % 2 != 0 {
                    return Err(ExprError::at(pos, "c may only appear as an even power (c^2 = 1/eps)"));
                }
                return Ok(OperatorSeries::eps(table, -n / 2));
            }
        }
    }
    let b = eval(base, table, env)?;
    if n >= 0 {
        return b.pow(n as u32).map_err(alg);
    }
    let inv = invert(&b).ok_or_else(|| ExprError::at(pos, "negative powers need a nonzero scalar monomial"))?;
    inv.pow((-n) as u32).map_err(alg)
}
