use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::opalg::{OperatorSeries, Rule, ScalarId, SymId, SymbolTable};
use crate::opexpr::ScenarioConfig;
use crate::{Rational, Table};

use super::sparse::SparseOperator;
use super::{cplx, re, HilbertError, Real};

/// Physical parameters and truncation sizes of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec<T: Real> {
    pub d_cm: usize,
    pub d_int: usize,
    pub hbar: T,
    pub mass: T,
    pub omega_cm: T,
    pub omega_int: T,
    pub lambda: T,
    pub g: T,
    pub c: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> ModelSpec<T> {
    pub fn eps(&self) -> T {
        T::one() / (self.c * self.c)
    }

    /// Ladder length `sqrt(ħ/(M ω_cm))`.
    pub fn x0(&self) -> T {
        (self.hbar / (self.mass * self.omega_cm)).sqrt()
    }
}

impl ModelSpec<f64> {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let p = &cfg.physics;
        Self {
            d_cm: cfg.truncation.d_cm,
            d_int: cfg.truncation.d_int,
            hbar: p.hbar,
            mass: p.mass,
            omega_cm: p.omega_cm,
            omega_int: p.omega_int,
            lambda: p.lambda,
            g: p.g,
            c: p.c,
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleCheck {
    pub a: String,
    pub b: String,
    /// Relative Frobenius residual on the bulk projector.
    pub residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BindingReport {
    pub bulk_cm: usize,
    pub bulk_int: usize,
    pub rules_checked: Vec<RuleCheck>,
    /// Symbols bound to zero (transverse directions, opaque internal
    /// commutators); their rules are not checked.
    pub inactive: Vec<String>,
    pub max_rule_residual: f64,
    pub max_hermiticity_defect: f64,
    pub passed: bool,
}

pub const RULE_TOL: f64 = 1e-8;
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Truncated c.m. ⊗ internal space with bound symbols. Full-space index is
/// `i_cm · D_int + i_int`.
#[derive(Clone, Debug)]
pub struct HilbertModel<T: Real> {
    table: Arc<Table>,
    spec: ModelSpec<T>,
    ops: BTreeMap<SymId, SparseOperator<T>>,
    scalars: BTreeMap<ScalarId, T>,
    pub validation: BindingReport,
}

fn ceil_frac(d: usize) -> usize {
    (d * 4).div_ceil(5)
}

fn ladder<T: Real>(d: usize) -> SparseOperator<T> {
    SparseOperator::from_triplets(d, (1..d).map(|n| (n - 1, n, cplx(re::<T>(n as f64).sqrt(), T::zero()))))
}

/// c.m. position and momentum in the ladder basis.
pub fn ladder_xp<T: Real>(d: usize, x0: T, hbar: T) -> (SparseOperator<T>, SparseOperator<T>) {
    let a = ladder::<T>(d);
    let ad = a.adjoint();
    let s2: T = re::<T>(2.0).sqrt();
    let x = a.add(&ad).scale(cplx(x0 / s2, T::zero()));
    let p0 = hbar / x0;
    let p = ad.sub(&a).scale(cplx(T::zero(), p0 / s2));
    (x, p)
}

fn zero_c<T: Real>() -> Complex<T> {
    cplx(T::zero(), T::zero())
}

impl<T: Real> HilbertModel<T> {
    pub fn table(&self) -> &Arc<Table> {
        &self.table
    }

    pub fn spec(&self) -> &ModelSpec<T> {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.d_cm * self.spec.d_int
    }

    pub fn index(&self, i_cm: usize, i_int: usize) -> usize {
        i_cm * self.spec.d_int + i_int
    }

    pub fn operator(&self, name: &str) -> Option<&SparseOperator<T>> {
        self.ops.get(&self.table.symbol(name)?)
    }

    pub fn scalar_value(&self, name: &str) -> Option<T> {
        self.scalars.get(&self.table.scalar(name)?).copied()
    }

    /// Copy with one scalar rebound.
    pub fn with_scalar(&self, name: &str, value: T) -> Result<Self, HilbertError> {
        let id = self.table.scalar(name).ok_or_else(|| HilbertError::Unbound(name.into()))?;
        let mut m = self.clone();
        m.scalars.insert(id, value);
        Ok(m)
    }

    /// Full-space indices of the c.m. block at internal level `n`.
    /// Full-space indices of the bulk: the lowest `⌈0.8·D⌉` levels of each
    /// sector, where truncated products still obey the commutation rules.
    pub fn bulk_indices(&self) -> Vec<usize> {
        let (bc, bi) = (ceil_frac(self.spec.d_cm), ceil_frac(self.spec.d_int));
        (0..bc).flat_map(|i| (0..bi).map(move |j| (i, j))).map(|(i, j)| self.index(i, j)).collect()
    }

    pub fn block_indices(&self, n: usize) -> Vec<usize> {
        (0..self.spec.d_cm).map(|i| self.index(i, n)).collect()
    }

    /// The c.m. block of `op` at internal level `n`. Fails when `op` mixes
    /// internal levels.
    pub fn block(&self, op: &SparseOperator<T>, n: usize) -> Result<SparseOperator<T>, HilbertError> {
        let idx = self.block_indices(n);
        let leak = op.leakage(&idx).sqrt();
        let scale = op.frobenius_norm().max(T::one());
        if leak > re::<T>(1e-14) * scale {
            return Err(HilbertError::NotBlockDiagonal { level: n, leakage: leak.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(op.restrict(&idx))
    }

    /// `|ψ_cm⟩ ⊗ |n⟩`.
    pub fn embed(&self, cm: &nalgebra::DVector<Complex<T>>, n: usize) -> nalgebra::DVector<Complex<T>> {
        let mut v = nalgebra::DVector::from_element(self.dim(), zero_c());
        for i in 0..self.spec.d_cm {
            v[self.index(i, n)] = cm[i];
        }
        v
    }

    /// Scalar value of a coefficient under the current bindings.
    pub fn eval_coeff(&self, c: &crate::opalg::Coeff<Rational>) -> Result<Complex<T>, HilbertError> {
        let bind = |id: ScalarId| self.scalars.get(&id).and_then(|v| v.to_f64());
        match c.eval(&bind) {
            Some((r, i)) => Ok(cplx(re(r), re(i))),
            None => {
                let missing = c
                    .terms()
                    .flat_map(|(m, _)| m.factors().iter().map(|f| f.0))
                    .find(|id| !self.scalars.contains_key(id))
                    .map(|id| self.table.scalar_name(id).to_string())
                    .unwrap_or_default();
                Err(HilbertError::Unbound(missing))
            }
        }
    }
}

/// Builds bindings for the physics table and validates them.
pub fn build_model<T: Real>(table: &Arc<Table>, spec: ModelSpec<T>) -> Result<HilbertModel<T>, HilbertError> {
    let model = build_model_unchecked(table, spec)?;
    if !model.validation.passed {
        let worst = model
            .validation
            .rules_checked
            .iter()
            .filter(|r| !r.passed)
            .max_by(|a, b| a.residual.total_cmp(&b.residual));
        return Err(match worst {
            Some(r) => HilbertError::BindingValidation { rule: format!("[{}, {}]", r.a, r.b), residual: r.residual },
            None => HilbertError::NotHermitian {
                what: "bound operator".into(),
                defect: model.validation.max_hermiticity_defect,
            },
        });
    }
    Ok(model)
}

pub fn build_model_from_config(table: &Arc<Table>, cfg: &ScenarioConfig) -> Result<HilbertModel<f64>, HilbertError> {
    build_model(table, ModelSpec::from_config(cfg))
}

/// Like [`build_model`] but returns failing models with their report.
pub fn build_model_unchecked<T: Real>(table: &Arc<Table>, spec: ModelSpec<T>) -> Result<HilbertModel<T>, HilbertError> {
    let (dc, di) = (spec.d_cm, spec.d_int);
    if dc < 1 || di < 1 {
        return Err(HilbertError::Invalid("sector dimensions must be positive".into()));
    }
    let (x, p) = ladder_xp(dc, spec.x0(), spec.hbar);
    let half: T = re(0.5);
    let h0 = SparseOperator::diagonal(
        (0..di).map(|n| cplx(spec.hbar * spec.omega_int * (re::<T>(n as f64) + half), T::zero())),
    );
    let h1 = SparseOperator::diagonal((0..di).map(|n| {
        let k = re::<T>(n as f64) + half;
        cplx(-spec.lambda * k * k, T::zero())
    }));
    let full = dc * di;
    let mut ops = BTreeMap::new();
    let mut inactive = Vec::new();
    for (id, sym) in table.symbols().iter().enumerate() {
        let id = id as SymId;
        let m = match sym.name.as_str() {
            "X" => Some(x.kron_identity(di)),
            "Px" => Some(p.kron_identity(di)),
            "Hrel0" => Some(h0.identity_kron(dc)),
            "Hrel1" => Some(h1.identity_kron(dc)),
            "Y" | "Z" | "Py" | "Pz" | "Cint" => {
                inactive.push(sym.name.clone());
                Some(SparseOperator::zeros(full))
            }
            _ => None,
        };
        if let Some(m) = m {
            ops.insert(id, m);
        }
    }
    let mut scalars = BTreeMap::new();
    let mut bind = |name: &str, v: T| {
        if let Some(id) = table.scalar(name) {
            scalars.insert(id, v);
        }
    };
    bind("hbar", spec.hbar);
    bind("M", spec.mass);
    bind("g", spec.g);
    bind("omega", spec.omega_int);
    bind("lambda", spec.lambda);
    bind("alpha", spec.alpha);
    bind("beta", spec.beta);
    bind("wcm", spec.omega_cm);
    bind("xb", T::zero());
    bind("u1", T::zero());
    let mut model = HilbertModel { table: table.clone(), spec, ops, scalars, validation: BindingReport::default() };
    model.validation = validate(&model, inactive)?;
    Ok(model)
}

fn validate<T: Real>(m: &HilbertModel<T>, inactive: Vec<String>) -> Result<BindingReport, HilbertError> {
    let (bc, bi) = (ceil_frac(m.spec.d_cm), ceil_frac(m.spec.d_int));
    let bulk = m.bulk_indices();
    let mut report = BindingReport { bulk_cm: bc, bulk_int: bi, inactive, ..Default::default() };
    for op in m.ops.values() {
        let d = op.hermiticity_defect().to_f64().unwrap_or(f64::INFINITY);
        report.max_hermiticity_defect = report.max_hermiticity_defect.max(d);
    }
    let ids: Vec<SymId> = m.ops.keys().copied().collect();
    for (k, &a) in ids.iter().enumerate() {
        for &b in &ids[k + 1..] {
            let (ma, mb) = (&m.ops[&a], &m.ops[&b]);
            if ma.is_zero() || mb.is_zero() {
                continue;
            }
            let expected = match m.table.rule(a, b)? {
                Rule::Commute => SparseOperator::zeros(m.dim()),
                Rule::Canonical(c) => SparseOperator::identity(m.dim()).scale(m.eval_coeff(c)?),
                Rule::Explicit(terms) => evaluate(&OperatorSeries::from_terms(&m.table, terms.clone())?, m)?,
            };
            let comm = ma.commutator(mb).restrict(&bulk);
            let exp = expected.restrict(&bulk);
            let en = exp.frobenius_norm();
            let denom = if en > T::zero() {
                en
            } else {
                (ma.restrict(&bulk).frobenius_norm() * mb.restrict(&bulk).frobenius_norm()).max(T::one())
            };
            let r = (comm.sub(&exp).frobenius_norm() / denom).to_f64().unwrap_or(f64::INFINITY);
            report.max_rule_residual = report.max_rule_residual.max(r);
            report.rules_checked.push(RuleCheck {
                a: m.table.name(a).into(),
                b: m.table.name(b).into(),
                residual: r,
                passed: r <= RULE_TOL,
            });
        }
    }
    report.passed =
        report.rules_checked.iter().all(|r| r.passed) && report.max_hermiticity_defect <= HERMITIAN_TOL;
    Ok(report)
}

/// Evaluates a series literally: stored words multiplied in order, scalars
/// substituted, ε bound to 1/c².
pub fn evaluate<T: Real>(a: &OperatorSeries<Rational>, m: &HilbertModel<T>) -> Result<SparseOperator<T>, HilbertError> {
    if !SymbolTable::same(a.table(), &m.table) {
        return Err(HilbertError::Invalid("series and model use different symbol tables".into()));
    }
    let eps = m.spec.eps();
    let mut powers: BTreeMap<(SymId, u32), SparseOperator<T>> = BTreeMap::new();
    let mut out = SparseOperator::zeros(m.dim());
    for ((e, word), c) in a.terms() {
        let k = m.eval_coeff(c)? * cplx(eps.powi(*e), T::zero());
        let mut acc: Option<SparseOperator<T>> = None;
        for &(s, p) in word {
            let base = m.ops.get(&s).ok_or_else(|| HilbertError::Unbound(m.table.name(s).into()))?;
            let pw = powers
                .entry((s, p))
                .or_insert_with(|| (1..p).fold(base.clone(), |x, _| x.mul(base)))
                .clone();
            acc = Some(match acc {
                None => pw,
                Some(x) => x.mul(&pw),
            });
        }
        let term = acc.unwrap_or_else(|| SparseOperator::identity(m.dim())).scale(k);
        out = out.add(&term);
    }
    Ok(out)
}

/// Evaluates a Hamiltonian with the rest energy dropped.
///
/// Normal-ordered words such as `X·Px²` carry commutator corrections that
/// only balance where `[X, Px] = iħ` holds, so the literal matrix has an
/// anti-Hermitian part at the top of the ladder. Hermiticity is checked on
/// the bulk and the result is symmetrized, `(H + H†)/2`.
pub fn evaluate_hamiltonian<T: Real>(
    h: &OperatorSeries<Rational>,
    m: &HilbertModel<T>,
) -> Result<SparseOperator<T>, HilbertError> {
    let op = evaluate(&h.drop_rest_energy(), m)?;
    let bulk = op.restrict(&m.bulk_indices());
    let defect = bulk.hermiticity_defect();
    if defect > re(HERMITIAN_TOL) {
        return Err(HilbertError::NotHermitian { what: "Hamiltonian".into(), defect: defect.to_f64().unwrap_or(f64::NAN) });
    }
    let mut op = op.add(&op.adjoint()).scale(cplx(re(0.5), T::zero()));
    op.observable = true;
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::PhysicsTable;
    use crate::opexpr::parse_expr;

    fn table() -> Arc<Table> {
        SymbolTable::physics(&PhysicsTable::default())
    }

    #[test]
    fn canonical_pair_on_bulk() {
        let t = table();
        let m = build_model(&t, super::super::test_spec(32, 8)).unwrap();
        let xp = m.validation.rules_checked.iter().find(|r| r.a == "X" && r.b == "Px").unwrap();
        assert!(xp.residual < 1e-12, "{}", xp.residual);
        assert!(m.validation.max_hermiticity_defect <= 1e-12);
        let comm = evaluate(&parse_expr("[X, Px]", &t).unwrap(), &m).unwrap();
        assert!((comm.to_dense()[(0, 0)] - Complex::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_lambda_binds_zero_hrel1() {
        let m = build_model(&table(), super::super::test_spec(8, 4)).unwrap();
        assert!(m.operator("Hrel1").unwrap().is_zero());
    }

    #[test]
    fn minimal_space_fails_bulk_check() {
        let t = table();
        let m = build_model_unchecked(&t, super::super::test_spec(2, 2)).unwrap();
        assert!(m.validation.max_hermiticity_defect <= 1e-12);
        assert!(!m.validation.passed);
        assert!(matches!(build_model(&t, super::super::test_spec(2, 2)), Err(HilbertError::BindingValidation { .. })));
    }

    #[test]
    fn unbound_symbol_and_scalar() {
        let t = table();
        let m = build_model(&t, super::super::test_spec(8, 4)).unwrap();
        let e = evaluate(&parse_expr("x1", &t).unwrap(), &m).unwrap_err();
        assert_eq!(e, HilbertError::Unbound("x1".into()));
        let e = evaluate(&parse_expr("m1*X", &t).unwrap(), &m).unwrap_err();
        assert_eq!(e, HilbertError::Unbound("m1".into()));
    }

    #[test]
    fn eps_binding_and_linearity() {
        let t = table();
        let m = build_model(&t, super::super::test_spec(8, 4)).unwrap();
        let a = parse_expr("eps*Px^2*Hrel0", &t).unwrap();
        let b = parse_expr("X^2 - 1/2*Hrel0", &t).unwrap();
        let ea = evaluate(&a, &m).unwrap();
        let eb = evaluate(&b, &m).unwrap();
        let sum = evaluate(&a.add(&b).unwrap(), &m).unwrap();
        assert!(super::super::sparse::relative_frobenius(&sum, &ea.add(&eb)) < 1e-14);
        let unit = evaluate(&parse_expr("eps", &t).unwrap(), &m).unwrap();
        assert!((unit.to_dense()[(3, 3)].re - 0.01).abs() < 1e-16);
    }

    #[test]
    fn block_extraction() {
        let t = table();
        let m = build_model(&t, super::super::test_spec(6, 3)).unwrap();
        let h = evaluate(&parse_expr("Px^2/2 + Hrel0", &t).unwrap(), &m).unwrap();
        let b = m.block(&h, 2).unwrap();
        assert_eq!(b.dim(), 6);
        // p0 = ħ/x0 = 0.1, ⟨0|P²|0⟩ = p0²/2
        assert!((b.to_dense()[(0, 0)].re - 2.5025).abs() < 1e-14);
        let mixing = SparseOperator::from_triplets(18, [(0, 1, Complex::new(1.0, 0.0))]);
        assert!(m.block(&mixing, 0).is_err());
    }
}
