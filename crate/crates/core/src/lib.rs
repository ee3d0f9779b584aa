//! Operator algebra and truncated-space dynamics for composite particles
//! seen by inertial and uniformly accelerated observers.

pub mod charts;
pub mod ehrenfest;
pub mod opalg;
pub mod factory;
pub mod hilbert;
pub mod opexpr;
pub mod scenario;

/// Arbitrary-precision rational used by default for exact algebra.
pub type Rational = num_rational::BigRational;
pub type Series = opalg::OperatorSeries<Rational>;
pub type Table = opalg::SymbolTable<Rational>;
pub type Model = hilbert::HilbertModel<f64>;
pub type Operator = hilbert::SparseOperator<f64>;
