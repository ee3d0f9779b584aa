//! Poincaré generators, Minkowski and Rindler Hamiltonians, supporting potentials.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::opalg::{
    series_sqrt, AlgebraError, Coeff, ExactScalar, Gauss, OperatorSeries, ScalarId, ScalarMono, SymbolTable,
};

use super::FactoryError;

type S<Q> = OperatorSeries<Q>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorForm {
    FreeParticles,
    CenterOfMass,
}

/// The ten generators at t = 0.
#[derive(Clone, Debug)]
pub struct GeneratorSet<Q: ExactScalar> {
    pub p: [S<Q>; 3],
    pub j: [S<Q>; 3],
    pub k: [S<Q>; 3],
    pub h: S<Q>,
    pub form: GeneratorForm,
    pub order: i32,
}

impl<Q: ExactScalar> GeneratorSet<Q> {
    /// `(name, generator)` pairs named `{prefix}P1 … {prefix}K3, {prefix}H`.
    pub fn named(&self, prefix: &str) -> Vec<(String, S<Q>)> {
        let mut out = Vec::new();
        for (tag, v) in [("P", &self.p), ("J", &self.j), ("K", &self.k)] {
            for (i, s) in v.iter().enumerate() {
                out.push((format!("{prefix}{tag}{}", i + 1), s.clone()));
            }
        }
        out.push((format!("{prefix}H"), self.h.clone()));
        out
    }
}

fn sym<Q: ExactScalar>(t: &Arc<SymbolTable<Q>>, name: &str) -> Result<S<Q>, FactoryError> {
    Ok(S::named(t, name)?)
}

fn scalar<Q: ExactScalar>(t: &Arc<SymbolTable<Q>>, name: &str) -> Result<S<Q>, FactoryError> {
    Ok(S::scalar_named(t, name)?)
}

fn scalar_id<Q: ExactScalar>(t: &Arc<SymbolTable<Q>>, name: &str) -> Result<ScalarId, FactoryError> {
    Ok(t.scalar(name).ok_or_else(|| AlgebraError::UnknownSymbol(name.into()))?)
}

fn cross<Q: ExactScalar>(r: &[S<Q>; 3], p: &[S<Q>; 3]) -> Result<[S<Q>; 3], AlgebraError> {
    let c = |a: usize, b: usize| r[a].mul(&p[b])?.sub(&r[b].mul(&p[a])?);
    Ok([c(1, 2)?, c(2, 0)?, c(0, 1)?])
}

fn sum_sq<Q: ExactScalar>(v: &[S<Q>; 3]) -> Result<S<Q>, AlgebraError> {
    let mut out = v[0].mul(&v[0])?;
    for x in &v[1..] {
        out = out.add(&x.mul(x)?)?;
    }
    Ok(out)
}

/// `ε/2 · {r, T}`.
fn half_eps_acomm<Q: ExactScalar>(r: &S<Q>, t: &S<Q>) -> Result<S<Q>, AlgebraError> {
    Ok(r.anticommutator(t)?.shift_eps(1).scale(&Coeff::ratio(1, 2)))
}

/// Free spinless particles; particle μ uses symbols `xμ, yμ, zμ, pxμ, …` and
/// the mass scalar named in `masses[μ-1]`.
pub fn build_free_particle_generators<Q: ExactScalar>(
    table: &Arc<SymbolTable<Q>>,
    masses: &[&str],
    k: i32,
) -> Result<GeneratorSet<Q>, FactoryError> {
    if k < 0 {
        return Err(FactoryError::InvalidOrder(k));
    }
    if masses.is_empty() {
        return Err(FactoryError::Invalid("at least one particle is needed".into()));
    }
    let zero = S::zero(table);
    let mut p = [zero.clone(), zero.clone(), zero.clone()];
    let mut j = p.clone();
    let mut kb = p.clone();
    let mut h = zero;
    for (mu, m) in masses.iter().enumerate() {
        let n = mu + 1;
        let r = [sym(table, &format!("x{n}"))?, sym(table, &format!("y{n}"))?, sym(table, &format!("z{n}"))?];
        let pm = [sym(table, &format!("px{n}"))?, sym(table, &format!("py{n}"))?, sym(table, &format!("pz{n}"))?];
        let mass = scalar(table, m)?;
        // p²c² + m²c⁴
        let arg = sum_sq(&pm)?.shift_eps(-1).add(&mass.mul(&mass)?.shift_eps(-2))?;
        let t = series_sqrt(&arg, k)?;
        let l = cross(&r, &pm)?;
        for i in 0..3 {
            p[i] = p[i].add(&pm[i])?;
            j[i] = j[i].add(&l[i])?;
            kb[i] = kb[i].add(&half_eps_acomm(&r[i], &t)?)?;
        }
        h = h.add(&t)?;
    }
    Ok(GeneratorSet { p, j, k: kb, h, form: GeneratorForm::FreeParticles, order: k })
}

/// `Hrel = Mc² + Hrel0 + ε·Hrel1`.
pub fn hrel_composite<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>) -> Result<S<Q>, FactoryError> {
    let mc2 = scalar(table, "M")?.shift_eps(-1);
    Ok(mc2.add(&sym(table, "Hrel0")?)?.add(&sym(table, "Hrel1")?.shift_eps(1))?)
}

/// `sqrt(P²c² + Hrel²)` with the composite internal Hamiltonian.
pub fn h_minkowski<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>, k: i32) -> Result<S<Q>, FactoryError> {
    if k < 0 {
        return Err(FactoryError::InvalidOrder(k));
    }
    let pv = [sym(table, "Px")?, sym(table, "Py")?, sym(table, "Pz")?];
    let hrel = hrel_composite(table)?;
    let arg = sum_sq(&pv)?.shift_eps(-1).add(&hrel.mul(&hrel)?)?;
    Ok(series_sqrt(&arg, k)?)
}

/// Single-particle-form generators in c.m. variables.
pub fn build_cm_generators<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>, k: i32) -> Result<GeneratorSet<Q>, FactoryError> {
    let x = [sym(table, "X")?, sym(table, "Y")?, sym(table, "Z")?];
    let p = [sym(table, "Px")?, sym(table, "Py")?, sym(table, "Pz")?];
    let h = h_minkowski(table, k)?;
    let j = cross(&x, &p)?;
    let kb = [half_eps_acomm(&x[0], &h)?, half_eps_acomm(&x[1], &h)?, half_eps_acomm(&x[2], &h)?];
    Ok(GeneratorSet { p, j, k: kb, h, form: GeneratorForm::CenterOfMass, order: k })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RindlerRoute {
    /// `H + (g/2c²){X, H}`.
    Anticommutator,
    /// `H + g·K_x` at t = 0.
    Boost,
}

pub fn h_rindler<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>, k: i32, via: RindlerRoute) -> Result<S<Q>, FactoryError> {
    let g = scalar(table, "g")?;
    let out = match via {
        RindlerRoute::Anticommutator => {
            let hm = h_minkowski(table, k)?;
            let x = sym(table, "X")?;
            hm.add(&half_eps_acomm(&x, &hm)?.mul(&g)?)?
        }
        RindlerRoute::Boost => {
            let gen = build_cm_generators(table, k)?;
            gen.h.add(&gen.k[0].mul(&g)?)?
        }
    };
    Ok(out.truncate(k))
}

#[derive(Clone, Debug)]
pub enum SupportPotential<Q: ExactScalar> {
    /// `−MgX`.
    ClassicalLevel0,
    /// `−MgX + ε(−Hrel0·gX − (g/2M)(αXP² + βP²X))`.
    Quantum { alpha: Coeff<Q>, beta: Coeff<Q> },
}

impl<Q: ExactScalar> SupportPotential<Q> {
    pub fn symmetric() -> Self {
        Self::Quantum { alpha: Coeff::ratio(1, 2), beta: Coeff::ratio(1, 2) }
    }
}

pub fn u_support<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>, mode: &SupportPotential<Q>) -> Result<S<Q>, FactoryError> {
    let x = sym(table, "X")?;
    let g = scalar(table, "g")?;
    let m = scalar(table, "M")?;
    let u0 = m.mul(&g)?.mul(&x)?.neg();
    match mode {
        SupportPotential::ClassicalLevel0 => Ok(u0),
        SupportPotential::Quantum { alpha, beta } => {
            if !alpha.add(beta).sub(&Coeff::one()).is_zero() {
                return Err(FactoryError::AlphaBeta);
            }
            let u1 = quantum_support_first_order(table, alpha, beta)?;
            Ok(u0.add(&u1.shift_eps(1))?)
        }
    }
}

/// The ε¹ coefficient of the quantum support potential.
pub fn quantum_support_first_order<Q: ExactScalar>(
    table: &Arc<SymbolTable<Q>>,
    alpha: &Coeff<Q>,
    beta: &Coeff<Q>,
) -> Result<S<Q>, FactoryError> {
    let x = sym(table, "X")?;
    let g = scalar(table, "g")?;
    let h0 = sym(table, "Hrel0")?;
    let p2 = sum_sq(&[sym(table, "Px")?, sym(table, "Py")?, sym(table, "Pz")?])?;
    let inv_2m = Coeff::term(Gauss::ratio(1, 2), ScalarMono::var(scalar_id(table, "M")?, -1));
    let mixed = x.mul(&p2)?.scale(alpha).add(&p2.mul(&x)?.scale(beta))?;
    Ok(h0.mul(&g)?.mul(&x)?.add(&mixed.mul(&g)?.scale(&inv_2m))?.neg())
}

/// `[Px, U] − (i/2ħ)[[X, U], P²]` for a first-order potential `U`.
pub fn no_acceleration_lhs<Q: ExactScalar>(u: &S<Q>) -> Result<S<Q>, FactoryError> {
    let table = u.table();
    let x = sym(table, "X")?;
    let px = sym(table, "Px")?;
    let p2 = sum_sq(&[px.clone(), sym(table, "Py")?, sym(table, "Pz")?])?;
    let i_over_2hbar = Coeff::term(Gauss::new(Q::zero(), Q::from_ratio(1, 2)), ScalarMono::var(scalar_id(table, "hbar")?, -1));
    let first = px.commutator(u)?;
    let second = x.commutator(u)?.commutator(&p2)?.scale(&i_over_2hbar);
    Ok(first.sub(&second)?)
}

/// `iħg(Hrel0 + (P² − 2Px²)/2M)`.
pub fn no_acceleration_rhs<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>) -> Result<S<Q>, FactoryError> {
    let px = sym(table, "Px")?;
    let p2 = sum_sq(&[px.clone(), sym(table, "Py")?, sym(table, "Pz")?])?;
    let (m, hbar, g) = (scalar_id(table, "M")?, scalar_id(table, "hbar")?, scalar_id(table, "g")?);
    let kin = p2
        .sub(&px.mul(&px)?.scale(&Coeff::int(2)))?
        .scale(&Coeff::term(Gauss::ratio(1, 2), ScalarMono::var(m, -1)));
    let inner = sym(table, "Hrel0")?.add(&kin)?;
    let ihg = Coeff::term(Gauss::i(), ScalarMono::from_pairs([(hbar, 1), (g, 1)]));
    Ok(inner.scale(&ihg))
}
