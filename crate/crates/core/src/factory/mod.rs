//! Named operators (generators, Hamiltonians, support potentials) and the
//! identity suite that certifies their algebra.

pub mod generators;
pub mod hamiltonians;
pub mod identities;

pub use generators::{
    build_cm_generators, build_free_particle_generators, h_minkowski, h_rindler, hrel_composite,
    no_acceleration_lhs, no_acceleration_rhs, quantum_support_first_order, u_support, GeneratorForm, GeneratorSet,
    RindlerRoute, SupportPotential,
};
pub use hamiltonians::{
    accelerating_potential, curvature_term, scenario_hamiltonian, tuned_support, HamiltonianSpec,
};
pub use identities::{
    galilei_cases, poincare_cases, run_identity_suite, standard_env, CaseResult, Definition, IdentityCase,
    IdentityReport, IdentitySuite,
};

use crate::opalg::AlgebraError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FactoryError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("truncation order must be >= 0, got {0}")]
    InvalidOrder(i32),
    #[error("support potential needs alpha + beta = 1")]
    AlphaBeta,
    #[error("case file: {0}")]
    CaseFile(String),
    #[error("{0}")]
    Invalid(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{Coeff, PhysicsTable, SymbolTable};
    use crate::opexpr::parse_expr;
    use crate::{Rational, Series, Table};
    use std::sync::Arc;

    fn table() -> Arc<Table> {
        SymbolTable::physics(&PhysicsTable::default())
    }

    fn p(t: &Arc<Table>, s: &str) -> Series {
        parse_expr(s, t).unwrap()
    }

    #[test]
    fn free_particle_energy() {
        let t = table();
        let gen = build_free_particle_generators(&t, &["m1"], 1).unwrap();
        let expected = p(&t, "m1*c^2 + p1^2/(2*m1) - eps*p1^4/(8*m1^3)");
        assert_eq!(gen.h.exact(), expected);
        assert_eq!(gen.h.precision(), Some(1));
    }

    #[test]
    fn negative_order_rejected() {
        let t = table();
        assert_eq!(build_free_particle_generators(&t, &["m1"], -1).unwrap_err(), FactoryError::InvalidOrder(-1));
    }

    #[test]
    fn generators_are_self_adjoint() {
        let t = table();
        for set in [build_cm_generators(&t, 1).unwrap(), build_free_particle_generators(&t, &["m1"], 1).unwrap()] {
            for (name, g) in set.named("") {
                assert_eq!(g.adjoint().unwrap(), g, "{name}");
            }
        }
    }

    #[test]
    fn rindler_routes_agree_and_reduce_at_zero_g() {
        let t = table();
        let a = h_rindler(&t, 1, RindlerRoute::Anticommutator).unwrap();
        let b = h_rindler(&t, 1, RindlerRoute::Boost).unwrap();
        assert_eq!(a, b);
        let g = t.scalar("g").unwrap();
        let at_zero = a.substitute_scalar(g, &Coeff::zero()).unwrap();
        assert_eq!(at_zero, h_minkowski(&t, 1).unwrap());
        assert_eq!(a.adjoint().unwrap(), a);
    }

    #[test]
    fn rindler_linear_in_g() {
        let t = table();
        let h = h_rindler(&t, 1, RindlerRoute::Anticommutator).unwrap();
        let g = t.scalar("g").unwrap();
        assert_eq!(h.scalar_degree_part(g, 2).len(), 0);
        let sum = h.scalar_degree_part(g, 0).add(&h.scalar_degree_part(g, 1)).unwrap();
        assert_eq!(sum, h);
    }

    #[test]
    fn support_potential_forms() {
        let t = table();
        let u = u_support(&t, &SupportPotential::<Rational>::symmetric()).unwrap();
        assert_eq!(u, p(&t, "-M*g*X + eps*(-Hrel0*g*X - g/(4*M)*{X, P^2})"));
        let bad = SupportPotential::Quantum { alpha: Coeff::ratio(1, 2), beta: Coeff::ratio(1, 3) };
        assert_eq!(u_support::<Rational>(&t, &bad).unwrap_err(), FactoryError::AlphaBeta);
        let g = t.scalar("g").unwrap();
        assert!(u.substitute_scalar(g, &Coeff::zero()).unwrap().is_zero());
    }

    #[test]
    fn no_acceleration_identity() {
        let t = table();
        let u1 = quantum_support_first_order(&t, &Coeff::ratio(1, 2), &Coeff::ratio(1, 2)).unwrap();
        assert_eq!(no_acceleration_lhs(&u1).unwrap(), no_acceleration_rhs(&t).unwrap());
        let only_internal = p(&t, "-Hrel0*g*X");
        assert_eq!(no_acceleration_lhs(&only_internal).unwrap(), p(&t, "i*hbar*g*Hrel0"));
        assert!(no_acceleration_lhs(&Series::zero(&t)).unwrap().is_zero());
    }

    #[test]
    fn scenario_c_matches_b_at_first_order() {
        use crate::opexpr::{ScenarioTag, SupportMode};
        let t = table();
        let b = scenario_hamiltonian(&t, &HamiltonianSpec::<Rational>::new(ScenarioTag::B, SupportMode::None, 1)).unwrap();
        let c = scenario_hamiltonian(&t, &HamiltonianSpec::<Rational>::new(ScenarioTag::C, SupportMode::None, 1)).unwrap();
        assert_eq!(b, c);
        let d = scenario_hamiltonian(
            &t,
            &HamiltonianSpec::<Rational>::new(ScenarioTag::D, SupportMode::QuantumOperator, 1),
        )
        .unwrap();
        assert_eq!(d, h_minkowski(&t, 1).unwrap());
    }

    #[test]
    fn generated_relation_shapes() {
        let cases = poincare_cases("f", "x");
        assert!(cases.iter().any(|c| c.lhs == "[fK1, fK2]" && c.rhs == "-i*hbar*eps*fJ3"));
        assert!(cases.iter().any(|c| c.lhs == "[fJ2, fP1]" && c.rhs == "-i*hbar*fP3"));
    }
}
