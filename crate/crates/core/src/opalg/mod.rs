//! Exact noncommutative operator algebra graded by ε = 1/c².

pub mod coeff;
pub mod format;
mod order;
pub mod scalar;
pub mod series;
pub mod sqrt;
pub mod table;

pub use coeff::{Coeff, ScalarId, ScalarMono};
pub use format::format_canonical;
pub use scalar::{ExactScalar, Gauss};
pub use series::{OperatorSeries, TermMap, Word};
pub use sqrt::series_sqrt;
pub use table::{physics_builder, PhysicsTable, Rule, Sector, SymId, SymbolTable, SymbolTableBuilder};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("missing commutation rule for ({a}, {b})")]
    MissingRule { a: String, b: String },
    #[error("operands belong to different symbol tables")]
    TableMismatch,
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("no scalar leading square: {0}")]
    NoScalarLeadingSquare(String),
    #[error("ordering-ambiguous square root: {a} and {b} do not commute")]
    AmbiguousSquareRoot { a: String, b: String },
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("commutator rewriting did not terminate")]
    RewriteDepth,
    #[error("{0}")]
    Invalid(String),
}
