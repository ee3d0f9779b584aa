//! Scenario Hamiltonians for the four observer/particle constellations.

use std::sync::Arc;

use crate::opalg::{Coeff, ExactScalar, Gauss, OperatorSeries, ScalarMono, SymbolTable};
use crate::opexpr::{ScenarioTag, SupportMode};

use super::generators::{h_minkowski, h_rindler, u_support, RindlerRoute, SupportPotential};
use super::FactoryError;

type S<Q> = OperatorSeries<Q>;

/// Symbolic choices that fix a scenario Hamiltonian.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec<Q: ExactScalar> {
    pub tag: ScenarioTag,
    pub support: SupportMode,
    pub order: i32,
    pub curvature: bool,
    /// Ordering weights for the quantum support potential.
    pub alpha: Coeff<Q>,
    pub beta: Coeff<Q>,
}

impl<Q: ExactScalar> HamiltonianSpec<Q> {
    pub fn new(tag: ScenarioTag, support: SupportMode, order: i32) -> Self {
        Self { tag, support, order, curvature: false, alpha: Coeff::ratio(1, 2), beta: Coeff::ratio(1, 2) }
    }
}

fn term<Q: ExactScalar>(
    table: &Arc<SymbolTable<Q>>,
    g: Gauss<Q>,
    scalars: &[(&str, i32)],
) -> Result<Coeff<Q>, FactoryError> {
    let mut pairs = Vec::new();
    for &(n, e) in scalars {
        let id = table.scalar(n).ok_or_else(|| FactoryError::Invalid(format!("table lacks scalar {n}")))?;
        pairs.push((id, e));
    }
    Ok(Coeff::term(g, ScalarMono::from_pairs(pairs)))
}

/// Accelerating potential of the inertial-observer scenario:
/// `MgX + ε(Hrel0·gX + (g/4M){X, P²})`.
pub fn accelerating_potential<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>) -> Result<S<Q>, FactoryError> {
    let x = S::named(table, "X")?;
    let h0 = S::named(table, "Hrel0")?;
    let mut p2 = S::zero(table);
    for n in ["Px", "Py", "Pz"] {
        let p = S::named(table, n)?;
        p2 = p2.add(&p.mul(&p)?)?;
    }
    let u0 = x.scale(&term(table, Gauss::one(), &[("M", 1), ("g", 1)])?);
    let u1 = x
        .mul(&h0)?
        .scale(&term(table, Gauss::one(), &[("g", 1)])?)
        .add(&x.anticommutator(&p2)?.scale(&term(table, Gauss::ratio(1, 4), &[("g", 1), ("M", -1)])?))?;
    Ok(u0.add(&u1.shift_eps(1))?)
}

/// Classical support with a tunable first-order slope: `−MgX + ε·u1·X`.
pub fn tuned_support<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>) -> Result<S<Q>, FactoryError> {
    let x = S::named(table, "X")?;
    let u0 = x.scale(&term(table, Gauss::int(-1), &[("M", 1), ("g", 1)])?);
    Ok(u0.add(&x.scale(&term(table, Gauss::one(), &[("u1", 1)])?).shift_eps(1))?)
}

/// `ε·½Mg²X²`.
pub fn curvature_term<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>) -> Result<S<Q>, FactoryError> {
    let x = S::named(table, "X")?;
    Ok(x.mul(&x)?.scale(&term(table, Gauss::ratio(1, 2), &[("M", 1), ("g", 2)])?).shift_eps(1))
}

/// Full scenario Hamiltonian, rest energy included, truncated at `order`.
pub fn scenario_hamiltonian<Q: ExactScalar>(
    table: &Arc<SymbolTable<Q>>,
    spec: &HamiltonianSpec<Q>,
) -> Result<S<Q>, FactoryError> {
    let k = spec.order;
    let mut h = match spec.tag {
        ScenarioTag::A => h_minkowski(table, k)?,
        ScenarioTag::B => h_rindler(table, k, RindlerRoute::Anticommutator)?,
        ScenarioTag::C => h_minkowski(table, k)?.add(&accelerating_potential(table)?)?,
        ScenarioTag::D => {
            let hr = h_rindler(table, k, RindlerRoute::Anticommutator)?;
            let u = match spec.support {
                SupportMode::None => return Err(FactoryError::Invalid("scenario d needs a support potential".into())),
                SupportMode::QuantumOperator => u_support(
                    table,
                    &SupportPotential::Quantum { alpha: spec.alpha.clone(), beta: spec.beta.clone() },
                )?,
                SupportMode::ClassicalTuned => tuned_support(table)?,
            };
            hr.add(&u)?
        }
    };
    if spec.curvature {
        h = h.add(&curvature_term(table)?)?;
    }
    Ok(h.truncate(k))
}
