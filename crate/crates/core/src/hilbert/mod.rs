//! Truncated c.m. ⊗ internal Hilbert spaces: symbol bindings, evaluation of
//! operator series, state preparation, Krylov propagation and visibility.

pub mod frozen;
pub mod model;
pub mod propagate;
pub mod sparse;
pub mod state;

use nalgebra::{Complex, RealField};
use num_traits::ToPrimitive;

pub use frozen::{frozen_energies, frozen_visibility};
pub use model::{
    build_model, build_model_from_config, build_model_unchecked, evaluate, evaluate_hamiltonian, ladder_xp,
    BindingReport, HilbertModel, ModelSpec, RuleCheck,
};
pub use propagate::{propagate, propagate_time_dependent, Krylov, KrylovOptions, Trajectory};
pub use sparse::{relative_frobenius, SparseOperator};
pub use state::{
    gaussian_packet, geometric_weights, partial_trace_cm, purity, thermal_n_max, thermal_weights, visibility,
    visibility_oracle, EnsembleMember, QuantumState,
};

use crate::opalg::AlgebraError;

/// Real scalar for numerical work.
pub trait Real: RealField + Copy + ToPrimitive + Send + Sync + 'static {}
impl<T: RealField + Copy + ToPrimitive + Send + Sync + 'static> Real for T {}

pub(crate) fn re<T: Real>(v: f64) -> T {
    nalgebra::convert(v)
}

pub(crate) fn cplx<T: Real>(r: T, i: T) -> Complex<T> {
    Complex::new(r, i)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HilbertError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("unbound symbol '{0}'")]
    Unbound(String),
    #[error("binding check failed for {rule}: relative residual {residual:e} on the bulk projector")]
    BindingValidation { rule: String, residual: f64 },
    #[error("{what} is not Hermitian (defect {defect:e})")]
    NotHermitian { what: String, defect: f64 },
    #[error("operator mixes internal level {level} with others (leakage {leakage:e})")]
    NotBlockDiagonal { level: usize, leakage: f64 },
    #[error("n_max = {n_max} leaves a thermal tail >= 1e-10; use n_max >= {minimum}")]
    NMaxTooSmall { n_max: usize, minimum: usize },
    #[error("packet not supported by the truncated basis (fidelity {fidelity})")]
    Support { fidelity: f64 },
    #[error("unitarity defect {defect:e} at step {step}")]
    Unitarity { step: usize, defect: f64 },
    #[error("Krylov propagator: {0}")]
    Krylov(String),
    #[error("ensemble mismatch: {0}")]
    Ensemble(String),
    #[error("{0}")]
    Invalid(String),
}

#[cfg(test)]
pub(crate) fn test_spec(d_cm: usize, d_int: usize) -> ModelSpec<f64> {
    ModelSpec {
        d_cm,
        d_int,
        hbar: 1.0,
        mass: 1.0,
        omega_cm: 1e-2,
        omega_int: 1.0,
        lambda: 0.0,
        g: 1e-3,
        c: 10.0,
        alpha: 0.5,
        beta: 0.5,
    }
}
