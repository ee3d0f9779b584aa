//! Declarative identity suite: `lhs − rhs` must vanish through a stated order.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::opalg::{format_canonical, ExactScalar, SymbolTable};
use crate::opexpr::{define_all, parse_expr_with, Env};

use super::generators::{build_cm_generators, build_free_particle_generators, h_rindler, RindlerRoute};
use super::FactoryError;

const SHIPPED: &str = include_str!("../../data/identities.toml");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityCase {
    pub name: String,
    #[serde(default)]
    pub anchor: String,
    pub lhs: String,
    pub rhs: String,
    pub order: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Definition {
    pub name: String,
    pub expr: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySuite {
    #[serde(default)]
    pub define: Vec<Definition>,
    #[serde(default)]
    pub case: Vec<IdentityCase>,
}

impl IdentitySuite {
    pub fn from_toml_str(text: &str) -> Result<Self, FactoryError> {
        toml::from_str(text).map_err(|e| FactoryError::CaseFile(e.to_string().trim().to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, FactoryError> {
        let text = std::fs::read_to_string(path).map_err(|e| FactoryError::CaseFile(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// The case file alone, without generated algebra cases.
    pub fn shipped_file() -> Self {
        Self::from_toml_str(SHIPPED).expect("shipped case file parses")
    }

    /// Case file plus generated Lie-algebra and contraction cases.
    pub fn shipped() -> Self {
        let mut s = Self::shipped_file();
        s.case.extend(poincare_cases("f", "free particle"));
        s.case.extend(poincare_cases("t", "two free particles"));
        s.case.extend(poincare_cases("c", "c.m. single-particle form"));
        s.case.extend(galilei_cases());
        s
    }
}

fn levi_civita(i: usize, j: usize) -> Option<(usize, i32)> {
    if i == j {
        return None;
    }
    let k = 3 - i - j;
    let sign = if (i + 1) % 3 == j { 1 } else { -1 };
    Some((k, sign))
}

fn signed(sign: i32, expr: String) -> String {
    if sign > 0 {
        expr
    } else {
        format!("-{expr}")
    }
}

/// Poincaré relations (ħ restored) for the generator set with prefix `s`.
pub fn poincare_cases(s: &str, label: &str) -> Vec<IdentityCase> {
    let mut out = Vec::new();
    let mut push = |name: String, lhs: String, rhs: String| {
        out.push(IdentityCase {
            name: format!("poincare_{s}_{name}"),
            anchor: format!("Poincare algebra, {label}"),
            lhs,
            rhs,
            order: 1,
        });
    };
    for i in 1..=3 {
        push(format!("p{i}_h"), format!("[{s}P{i}, {s}H]"), "0".into());
        push(format!("j{i}_h"), format!("[{s}J{i}, {s}H]"), "0".into());
        push(format!("k{i}_h"), format!("[{s}K{i}, {s}H]"), format!("i*hbar*{s}P{i}"));
        for j in 1..=3 {
            let rot = |g: &str| match levi_civita(i - 1, j - 1) {
                Some((k, sg)) => signed(sg, format!("i*hbar*{s}{g}{}", k + 1)),
                None => "0".to_string(),
            };
            push(format!("p{i}_p{j}"), format!("[{s}P{i}, {s}P{j}]"), "0".into());
            push(format!("j{i}_j{j}"), format!("[{s}J{i}, {s}J{j}]"), rot("J"));
            push(format!("j{i}_p{j}"), format!("[{s}J{i}, {s}P{j}]"), rot("P"));
            push(format!("j{i}_k{j}"), format!("[{s}J{i}, {s}K{j}]"), rot("K"));
            let kp = if i == j { format!("i*hbar*eps*{s}H") } else { "0".into() };
            push(format!("k{i}_p{j}"), format!("[{s}K{i}, {s}P{j}]"), kp);
            let kk = match levi_civita(i - 1, j - 1) {
                Some((k, sg)) => signed(-sg, format!("i*hbar*eps*{s}J{}", k + 1)),
                None => "0".into(),
            };
            push(format!("k{i}_k{j}"), format!("[{s}K{i}, {s}K{j}]"), kk);
        }
    }
    out
}

/// Galilei contraction at ε⁰ for the free particle (`g`) and c.m. (`n`) sets.
pub fn galilei_cases() -> Vec<IdentityCase> {
    let mut out = Vec::new();
    for (s, mass, label) in [("g", "m1", "free particle"), ("n", "M", "c.m. form")] {
        for i in 1..=3 {
            for j in 1..=3 {
                let rhs = if i == j { format!("i*hbar*{mass}") } else { "0".into() };
                out.push(IdentityCase {
                    name: format!("galilei_{s}_k{i}_p{j}"),
                    anchor: format!("Galilei contraction, {label}"),
                    lhs: format!("[{s}K{i}, {s}P{j}]"),
                    rhs,
                    order: 0,
                });
                out.push(IdentityCase {
                    name: format!("galilei_{s}_k{i}_k{j}"),
                    anchor: format!("Galilei contraction, {label}"),
                    lhs: format!("[{s}K{i}, {s}K{j}]"),
                    rhs: "0".into(),
                    order: 0,
                });
            }
        }
    }
    out.push(IdentityCase {
        name: "galilei_n_single_particle_h".into(),
        anchor: "Galilei single-particle form of the c.m. Hamiltonian".into(),
        lhs: "nH".into(),
        rhs: "M*c^2 + P^2/(2*M) + Hrel0".into(),
        order: 0,
    });
    out.push(IdentityCase {
        name: "galilei_n_boost".into(),
        anchor: "Galilei single-particle form of the c.m. boost".into(),
        lhs: "nK1".into(),
        rhs: "M*X".into(),
        order: 0,
    });
    out
}

/// Built-in names: generator sets `f` (one free particle), `t` (two free
/// particles), `c` (c.m. form) at order 1; `g`, `n` the same at order 0;
/// `HM`, `HR`, `HRb`.
pub fn standard_env<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>) -> Result<Env<Q>, FactoryError> {
    let sets = [
        ("f", build_free_particle_generators(table, &["m1"], 1)?),
        ("t", build_free_particle_generators(table, &["m1", "m2"], 1)?),
        ("g", build_free_particle_generators(table, &["m1"], 0)?),
        ("c", build_cm_generators(table, 1)?),
        ("n", build_cm_generators(table, 0)?),
    ];
    let mut env = Env::new();
    for (prefix, set) in &sets {
        env.extend(set.named(prefix));
    }
    env.insert("HM".into(), sets[3].1.h.clone());
    env.insert("HR".into(), h_rindler(table, 1, RindlerRoute::Anticommutator)?);
    env.insert("HRb".into(), h_rindler(table, 1, RindlerRoute::Boost)?);
    Ok(env)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub name: String,
    pub anchor: String,
    pub order: i32,
    pub passed: bool,
    /// Canonical form of `lhs − rhs` through the stated order.
    pub residual: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub cases: Vec<CaseResult>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseResult> {
        self.cases.iter().filter(|c| !c.passed)
    }
}

fn run_case<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>, env: &Env<Q>, c: &IdentityCase) -> CaseResult {
    let mut res = CaseResult {
        name: c.name.clone(),
        anchor: c.anchor.clone(),
        order: c.order,
        passed: false,
        residual: String::new(),
        error: None,
    };
    let lhs = parse_expr_with(&c.lhs, table, env).map_err(|e| format!("lhs {e}"));
    let rhs = parse_expr_with(&c.rhs, table, env).map_err(|e| format!("rhs {e}"));
    match (lhs, rhs) {
        (Ok(l), Ok(r)) => match l.sub(&r) {
            Ok(d) => {
                let d = d.truncate(c.order);
                res.passed = d.vanishes_through(c.order);
                res.residual = format_canonical(&d);
            }
            Err(e) => res.error = Some(e.to_string()),
        },
        (Err(e), _) | (_, Err(e)) => res.error = Some(e),
    }
    res
}

/// Evaluates every case; failures are report entries. Definition errors
/// fail all cases.
pub fn run_identity_suite<Q: ExactScalar>(table: &Arc<SymbolTable<Q>>, suite: &IdentitySuite) -> IdentityReport {
    let env = standard_env(table)
        .map_err(|e| e.to_string())
        .and_then(|env| {
            let defs: Vec<_> = suite.define.iter().map(|d| (d.name.clone(), d.expr.clone())).collect();
            define_all(&defs, table, env).map_err(|(n, e)| format!("definition {n}: {e}"))
        });
    let cases: Vec<CaseResult> = match &env {
        Ok(env) => suite.case.par_iter().map(|c| run_case(table, env, c)).collect(),
        Err(msg) => suite
            .case
            .iter()
            .map(|c| CaseResult {
                name: c.name.clone(),
                anchor: c.anchor.clone(),
                order: c.order,
                passed: false,
                residual: String::new(),
                error: Some(msg.clone()),
            })
            .collect(),
    };
    let passed = cases.iter().filter(|c| c.passed).count();
    IdentityReport { total: cases.len(), passed, failed: cases.len() - passed, cases }
}
