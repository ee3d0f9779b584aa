//! Ehrenfest dynamics of the c.m. position: the symbolic double commutator,
//! finite-difference accelerations and the tuned classical support.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::opalg::{AlgebraError, Coeff, ExactScalar, Gauss, OperatorSeries, ScalarMono, SymbolTable};

/// `−(1/ħ²)[[X, H], H]` truncated at ε¹.
pub fn symbolic_acceleration<Q: ExactScalar>(h: &OperatorSeries<Q>) -> Result<OperatorSeries<Q>, AlgebraError> {
    let t: &Arc<SymbolTable<Q>> = h.table();
    let x = OperatorSeries::named(t, "X")?;
    let hbar = t.scalar("hbar").ok_or_else(|| AlgebraError::UnknownSymbol("hbar".into()))?;
    let h1 = h.truncate(1);
    let dc = x.commutator(&h1)?.commutator(&h1)?;
    Ok(dc.scale(&Coeff::term(Gauss::int(-1), ScalarMono::var(hbar, -2))).truncate(1))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EhrenfestError {
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("time step must be positive")]
    BadStep,
}

/// Central second differences of `x` sampled every `dt`; length `n − 2`.
pub fn numeric_acceleration(x: &[f64], dt: f64) -> Result<Vec<f64>, EhrenfestError> {
    if x.len() < 3 {
        return Err(EhrenfestError::TooFewSamples(x.len()));
    }
    if !(dt > 0.0) {
        return Err(EhrenfestError::BadStep);
    }
    Ok(x.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / (dt * dt)).collect())
}

/// Expectation values entering the tuned first-order support.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SupportExpectations {
    pub hrel0: f64,
    pub p2: f64,
    pub px2: f64,
}

/// Slope `u1` of `U¹ = u1·X`: `u1 = −g(⟨Hrel0⟩ + (⟨P²⟩ − 2⟨Px²⟩)/2M)`.
pub fn tuned_classical_support(e: &SupportExpectations, mass: f64, g: f64) -> f64 {
    -g * (e.hrel0 + (e.p2 - 2.0 * e.px2) / (2.0 * mass))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EhrenfestReport {
    pub scenario: String,
    pub dt: f64,
    /// Times of the interior samples.
    pub times: Vec<f64>,
    pub symbolic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub residual: Vec<f64>,
    pub tolerance: f64,
    /// Finite-difference allowance `max|Δ⁴x|/(12 dt²)`.
    pub dt2_allowance: f64,
    pub max_residual: f64,
    pub max_abs_numeric: f64,
    pub passed: bool,
}

pub const DEFAULT_TOL: f64 = 1e-5;

/// Compares finite-difference accelerations of `mean_x` with the predicted
/// expectation values `predicted` (same sampling).
pub fn residual_report(
    scenario: &str,
    times: &[f64],
    mean_x: &[f64],
    predicted: &[f64],
    dt: f64,
    tol: f64,
) -> Result<EhrenfestReport, EhrenfestError> {
    let numeric = numeric_acceleration(mean_x, dt)?;
    let n = numeric.len();
    let symbolic: Vec<f64> = predicted[1..=n].to_vec();
    let residual: Vec<f64> = numeric.iter().zip(&symbolic).map(|(a, b)| a - b).collect();
    let d4 = mean_x
        .windows(5)
        .map(|w| (w[4] - 4.0 * w[3] + 6.0 * w[2] - 4.0 * w[1] + w[0]).abs())
        .fold(0.0, f64::max);
    let dt2_allowance = d4 / (12.0 * dt * dt);
    let max_residual = residual.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let max_abs_numeric = numeric.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    Ok(EhrenfestReport {
        scenario: scenario.to_string(),
        dt,
        times: times[1..=n].to_vec(),
        symbolic,
        numeric,
        residual,
        tolerance: tol,
        dt2_allowance,
        max_residual,
        max_abs_numeric,
        passed: max_residual <= tol + dt2_allowance,
    })
}
