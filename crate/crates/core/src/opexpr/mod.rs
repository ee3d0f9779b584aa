//! Operator-expression language and scenario configuration parsing.
//!
//! The grammar is documented in `docs/expression-grammar.md`.

pub mod config;
pub mod eval;
pub mod lexer;
pub mod parser;

use std::sync::Arc;

use crate::opalg::{ExactScalar, OperatorSeries, SymbolTable};

pub use crate::opalg::format_canonical;
pub use config::{
    parse_scenario, ConfigError, OutputFormat, PhysicsSection, PropagatorSection, ScenarioConfig, ScenarioSection,
    ScenarioTag, SupportMode, TruncationSection,
};
pub use eval::Env;
pub use lexer::Pos;
pub use parser::{parse, Expr};

/// Error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ExprError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ExprError {
    pub fn at(pos: Pos, msg: impl Into<String>) -> Self {
        Self { line: pos.line, col: pos.col, msg: msg.into() }
    }
}

pub fn parse_expr<Q: ExactScalar>(text: &str, table: &Arc<SymbolTable<Q>>) -> Result<OperatorSeries<Q>, ExprError> {
    parse_expr_with(text, table, &Env::new())
}

pub fn parse_expr_with<Q: ExactScalar>(
    text: &str,
    table: &Arc<SymbolTable<Q>>,
    env: &Env<Q>,
) -> Result<OperatorSeries<Q>, ExprError> {
    eval::eval(&parse(text)?, table, env)
}

/// Evaluates `name = expr` definitions in order; later ones may use earlier ones.
pub fn define_all<Q: ExactScalar>(
    defs: &[(String, String)],
    table: &Arc<SymbolTable<Q>>,
    mut env: Env<Q>,
) -> Result<Env<Q>, (String, ExprError)> {
    for (name, text) in defs {
        if table.symbol(name).is_some() || table.scalar(name).is_some() {
            return Err((name.clone(), ExprError { line: 1, col: 1, msg: format!("'{name}' shadows a table symbol") }));
        }
        let v = parse_expr_with(text, table, &env).map_err(|e| (name.clone(), e))?;
        env.insert(name.clone(), v);
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::PhysicsTable;
    use crate::{Rational, Series};

    fn table() -> Arc<SymbolTable<Rational>> {
        SymbolTable::physics(&PhysicsTable::default())
    }

    #[test]
    fn x_p_in_one_dimension() {
        let t = SymbolTable::<Rational>::physics(&PhysicsTable { dims: 1, particles: 1, internal_commute: true });
        let s = parse_expr("[X,P]", &t).unwrap();
        assert_eq!(format_canonical(&s), "(0+1/1i)*hbar^1");
    }

    #[test]
    fn bare_vector_is_rejected_in_three_dimensions() {
        let e = parse_expr("[X,P]", &table()).unwrap_err();
        assert_eq!((e.line, e.col), (1, 4));
    }

    #[test]
    fn acceleration_terms() {
        let t = table();
        let s = parse_expr("g/(4*M)*{X,P^2} + Hrel0*g*X", &t).unwrap();
        let by_hand = parse_expr("g/(4*M)*(X*P^2 + P^2*X) + g*X*Hrel0", &t).unwrap();
        assert_eq!(s, by_hand);
    }

    #[test]
    fn c_squared_is_inverse_eps() {
        let t = table();
        assert_eq!(parse_expr("M*c^2", &t).unwrap(), parse_expr("M/eps", &t).unwrap());
        assert!(parse_expr("c", &t).is_err());
        assert!(parse_expr("c^3", &t).is_err());
    }

    #[test]
    fn division_by_operator_rejected() {
        let e = parse_expr("Px/X", &table()).unwrap_err();
        assert!(e.msg.contains("division by an operator"));
        assert!(parse_expr("1/(M+g)", &table()).is_err());
    }

    #[test]
    fn unknown_symbol_positioned() {
        let e = parse_expr("X +\n Q", &table()).unwrap_err();
        assert_eq!((e.line, e.col), (2, 2));
    }

    #[test]
    fn round_trip_of_a_mixed_series() {
        let t = table();
        let s: Series = parse_expr("(1/2 - 3i)*hbar*M^-2*eps*Px^2*X + g*Hrel0 - 7*eps^-1 + O(eps^2)", &t).unwrap();
        let again = parse_expr(&format_canonical(&s), &t).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn definitions_chain() {
        let t = table();
        let env = define_all(
            &[("H0".into(), "P^2/(2*M) + Hrel0".into()), ("K".into(), "[X, H0]".into())],
            &t,
            Env::new(),
        )
        .unwrap();
        assert_eq!(env["K"], parse_expr("i*hbar/M*Px", &t).unwrap());
    }
}
