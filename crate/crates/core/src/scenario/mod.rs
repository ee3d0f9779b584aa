//! Scenario runner: builds the branch Hamiltonians of one observer/particle
//! constellation, propagates the thermal ensemble in both interferometer
//! branches and checks the outcome against oracles.
//!
//! Each branch is simulated in its own frame, recentered on the branch
//! position `xb = branch_center ± Δx/2`, with a weak trap `½M ω_cm² X²`
//! keeping the packet inside the truncated ladder basis.

mod output;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{Complex, DVector};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ehrenfest::{
    residual_report, symbolic_acceleration, tuned_classical_support, EhrenfestError, EhrenfestReport,
    SupportExpectations, DEFAULT_TOL,
};
use crate::factory::{run_identity_suite, scenario_hamiltonian, FactoryError, HamiltonianSpec, IdentitySuite};
use crate::hilbert::{
    build_model_from_config, evaluate, evaluate_hamiltonian, frozen_energies, frozen_visibility, gaussian_packet,
    thermal_n_max, thermal_weights, visibility_oracle, BindingReport, HilbertError, HilbertModel, Krylov,
    KrylovOptions,
};
use crate::opalg::{format_canonical, AlgebraError, Coeff, Gauss, OperatorSeries, PhysicsTable, ScalarMono, SymbolTable};
use crate::opexpr::{ConfigError, OutputFormat, ScenarioConfig, ScenarioTag, SupportMode};
use crate::{Model, Operator, Series, Table};

pub use output::{output_paths, write_curves, write_outputs, write_report, CurveRow, Curves, OutputPaths};

pub const SCHEMA_VERSION: u32 = 1;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const PHYSICS: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

/// Limits of the scenario checks.
pub mod limits {
    /// `1 − V` allowed where the visibility must stay constant.
    pub const VISIBILITY_LOSS: f64 = 1e-3;
    /// Relative deviation from the dephasing reference over `θ ∈ [0, π]`.
    pub const ORACLE_REL: f64 = 1e-3;
    /// Pure-phase evaluation against the closed form.
    pub const FROZEN_ABS: f64 = 1e-10;
    /// `|d²⟨X⟩/dt²|` in units of `g` for supported particles.
    pub const ACCEL_REL: f64 = 1e-3;
    /// Relative energy drift of time-independent runs.
    pub const ENERGY_DRIFT: f64 = 1e-8;
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Factory(#[from] FactoryError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Ehrenfest(#[from] EhrenfestError),
    #[error(
        "thermal weight {tail:e} lies outside the {levels} internal levels held by the model; \
         raise truncation.d_int or truncation.ensemble_tail (now {allowed:e})"
    )]
    EnsembleTail { tail: f64, levels: usize, allowed: f64 },
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("output: {0}")]
    Output(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        use HilbertError as H;
        match self {
            Self::Config(_) | Self::EnsembleTail { .. } | Self::Io { .. } | Self::Output(_) => exit::CONFIG,
            Self::Factory(FactoryError::Algebra(_)) | Self::Algebra(_) => exit::NUMERICAL,
            Self::Factory(_) => exit::CONFIG,
            Self::Hilbert(e) => match e {
                H::BindingValidation { .. } => exit::PHYSICS,
                H::Unbound(_) | H::NMaxTooSmall { .. } | H::Support { .. } | H::Ensemble(_) | H::Invalid(_) => {
                    exit::CONFIG
                }
                H::Algebra(_) | H::NotHermitian { .. } | H::NotBlockDiagonal { .. } | H::Unitarity { .. } | H::Krylov(_) => {
                    exit::NUMERICAL
                }
            },
            Self::Ehrenfest(_) => exit::CONFIG,
        }
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub frozen_cm: bool,
    pub order: Option<u8>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: ScenarioConfig) -> Result<ScenarioConfig, ConfigError> {
        if self.frozen_cm {
            cfg.scenario.frozen_cm = true;
        }
        if let Some(k) = self.order {
            cfg.scenario.order = k;
        }
        if let Some(d) = &self.out {
            cfg.output.dir = d.clone();
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Run the shipped identity suite and include its summary.
    pub identity_suite: bool,
    /// Recorded in the report; no effect on the dynamics.
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { identity_suite: true, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, passed: value <= limit }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilitySummary {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    pub min: f64,
    pub max: f64,
    /// `closed_form` or `frozen_phase`; absent when no dephasing is expected.
    pub reference: Option<String>,
    /// Largest relative deviation from the reference over `θ ≤ π`.
    pub max_rel_error: Option<f64>,
    /// Time at which the reference drops below ½, if it does.
    pub half_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunedSummary {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub wall_clock_s: f64,
    pub steps: usize,
    pub members: usize,
    pub branches: usize,
    pub krylov_substeps: usize,
    pub max_unitarity_defect: f64,
    pub max_energy_drift: Option<f64>,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub name: String,
    pub config: ScenarioConfig,
    pub seed: u64,
    pub identity: Option<IdentitySummary>,
    pub binding: BindingReport,
    /// Canonical form of the scenario Hamiltonian (before recentering).
    pub hamiltonian: String,
    pub thermal_levels: usize,
    pub thermal_tail: f64,
    pub curves: Option<String>,
    pub visibility: VisibilitySummary,
    pub ehrenfest: Option<EhrenfestReport>,
    pub tuned_support: Option<TunedSummary>,
    pub checks: Vec<Check>,
    pub stats: RunStats,
    pub passed: bool,
}

impl ScenarioReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            exit::PASS
        } else {
            exit::PHYSICS
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub report: ScenarioReport,
    pub curves: Curves,
}

pub fn scenario_name(cfg: &ScenarioConfig) -> String {
    cfg.scenario.name.clone().unwrap_or_else(|| format!("scenario-{}", cfg.scenario.tag))
}

pub fn physics_table() -> Arc<Table> {
    SymbolTable::physics(&PhysicsTable::default())
}

pub fn identity_summary(table: &Arc<Table>, suite: &IdentitySuite) -> IdentitySummary {
    let r = run_identity_suite(table, suite);
    IdentitySummary {
        total: r.total,
        passed: r.passed,
        failed: r.failed,
        failures: r.failures().map(|c| c.name.clone()).collect(),
    }
}

fn exact(v: f64, what: &str) -> Result<Coeff<crate::Rational>, RunError> {
    let r = BigRational::from_float(v).ok_or_else(|| RunError::Config(ConfigError::Invalid(vec![format!("{what} must be finite")])))?;
    Ok(Coeff::constant(Gauss::real(r)))
}

/// Symbolic scenario Hamiltonian for `cfg`.
pub fn hamiltonian(table: &Arc<Table>, cfg: &ScenarioConfig) -> Result<Series, RunError> {
    let s = &cfg.scenario;
    let mut spec = HamiltonianSpec::new(s.tag, s.support, s.order as i32);
    spec.curvature = s.curvature;
    spec.alpha = exact(cfg.physics.alpha, "physics.alpha")?;
    spec.beta = exact(cfg.physics.beta, "physics.beta")?;
    Ok(scenario_hamiltonian(table, &spec)?)
}

/// `H(X → X + xb)`, plus the trap `½M ω_cm² X²` unless `trap` is false.
pub fn branch_hamiltonian(h: &Series, trap: bool) -> Result<Series, RunError> {
    let t = h.table();
    let x = OperatorSeries::named(t, "X")?;
    let xb = OperatorSeries::scalar_named(t, "xb")?;
    let mut hb = h.substitute_named("X", &x.add(&xb)?)?;
    if trap {
        let m = t.scalar("M").ok_or_else(|| AlgebraError::UnknownSymbol("M".into()))?;
        let w = t.scalar("wcm").ok_or_else(|| AlgebraError::UnknownSymbol("wcm".into()))?;
        let k = Coeff::term(Gauss::ratio(1, 2), ScalarMono::from_pairs([(m, 1), (w, 2)]));
        hb = hb.add(&x.mul(&x)?.scale(&k))?;
    }
    Ok(hb)
}

/// Branch positions `(up, down)`.
pub fn branch_positions(cfg: &ScenarioConfig) -> (f64, f64) {
    let p = &cfg.physics;
    (p.branch_center + p.delta_x / 2.0, p.branch_center - p.delta_x / 2.0)
}

/// Dephasing angle `θ(t) = ω_int g Δx t / c²` (zero at order 0).
pub fn dephasing_angle(cfg: &ScenarioConfig, t: f64) -> f64 {
    if cfg.scenario.order == 0 {
        return 0.0;
    }
    let p = &cfg.physics;
    p.omega_int * p.g * p.delta_x * t * p.eps()
}

/// Time at which the closed-form visibility first drops to ½, if ever.
pub fn half_visibility_time(cfg: &ScenarioConfig) -> Option<f64> {
    let p = &cfg.physics;
    let q = p.nbar / (p.nbar + 1.0);
    let rate = dephasing_angle(cfg, 1.0);
    if q <= 0.0 || rate == 0.0 {
        return None;
    }
    let cos = (1.0 + q * q - 4.0 * (1.0 - q).powi(2)) / (2.0 * q);
    (cos.abs() <= 1.0).then(|| cos.acos() / rate.abs())
}

/// Thermal weights restricted to `levels`, with the discarded tail.
fn ensemble_weights(cfg: &ScenarioConfig, levels_cap: usize) -> Result<(Vec<f64>, f64), RunError> {
    let nbar = cfg.physics.nbar;
    let n_max = cfg.truncation.n_max.unwrap_or_else(|| thermal_n_max(nbar));
    let full = thermal_weights(nbar, n_max)?;
    let l = full.len().min(levels_cap);
    let q = nbar / (nbar + 1.0);
    let tail = if q == 0.0 { 0.0 } else { q.powi(l as i32) };
    let kept = &full[..l];
    let s: f64 = kept.iter().sum();
    Ok((kept.iter().map(|w| w / s).collect(), tail))
}

fn expect(op: &Operator, psi: &DVector<Complex<f64>>) -> f64 {
    op.expectation(psi).re
}

/// c.m. block operators of one internal level.
struct LevelOps {
    x: Operator,
    p: Operator,
    x2: Operator,
    p2: Operator,
    hrel0: f64,
}

/// Block Hamiltonian `h + u1·b` and acceleration `a0 + u1·a1` of one branch.
struct BranchOps {
    h: Operator,
    b: Option<Operator>,
    a0: Operator,
    a1: Option<Operator>,
}

impl BranchOps {
    fn hamiltonian(&self, u1: f64) -> Operator {
        match &self.b {
            Some(b) if u1 != 0.0 => self.h.add(&b.scale(Complex::new(u1, 0.0))),
            _ => self.h.clone(),
        }
    }

    fn acceleration(&self, psi: &DVector<Complex<f64>>, u1: f64) -> f64 {
        let a = expect(&self.a0, psi);
        match &self.a1 {
            Some(a1) => a + u1 * expect(a1, psi),
            None => a,
        }
    }
}

struct Track {
    weight: f64,
    level: usize,
    branches: [BranchOps; 2],
    psi: [DVector<Complex<f64>>; 2],
    e0: [f64; 2],
}

struct Sample {
    row: CurveRow,
    predicted: f64,
}

fn tuned_slope(tracks: &[Track], levels: &[LevelOps], states: &[[DVector<Complex<f64>>; 2]], cfg: &ScenarioConfig) -> f64 {
    let mut e = SupportExpectations::default();
    for (tr, psi) in tracks.iter().zip(states) {
        let l = &levels[tr.level];
        for v in psi {
            let w = 0.5 * tr.weight;
            e.hrel0 += w * l.hrel0;
            let px2 = expect(&l.p2, v);
            e.p2 += w * px2;
            e.px2 += w * px2;
        }
    }
    tuned_classical_support(&e, cfg.physics.mass, cfg.physics.g)
}

fn sample(t: f64, tracks: &[Track], levels: &[LevelOps], u1: f64) -> Sample {
    let (mut mx, mut mp, mut mx2, mut mh, mut pred) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut overlap = Complex::new(0.0, 0.0);
    let mut norm_defect: f64 = 0.0;
    for tr in tracks {
        let l = &levels[tr.level];
        for (b, v) in tr.branches.iter().zip(&tr.psi) {
            let w = 0.5 * tr.weight;
            mx += w * expect(&l.x, v);
            mp += w * expect(&l.p, v);
            mx2 += w * expect(&l.x2, v);
            mh += w * l.hrel0;
            pred += w * b.acceleration(v, u1);
            norm_defect = norm_defect.max((v.norm() - 1.0).abs());
        }
        overlap += tr.psi[0].dotc(&tr.psi[1]) * tr.weight;
    }
    Sample {
        row: CurveRow {
            t,
            mean_x: mx,
            mean_p: mp,
            var_x: mx2 - mx * mx,
            mean_hrel0: mh,
            visibility: overlap.norm(),
            norm_defect,
        },
        predicted: pred,
    }
}

/// Runs one scenario without touching the file system.
pub fn run_config(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ScenarioOutcome, RunError> {
    cfg.validate()?;
    let started = Instant::now();
    let table = physics_table();
    let identity = opts.identity_suite.then(|| identity_summary(&table, &IdentitySuite::shipped()));
    let h = hamiltonian(&table, cfg)?;
    let model = build_model_from_config(&table, cfg)?;
    let mut out = if cfg.scenario.frozen_cm {
        run_frozen(cfg, &h, &model)?
    } else {
        run_dynamics(cfg, &h, &model)?
    };
    let r = &mut out.report;
    r.seed = opts.seed;
    if let Some(id) = &identity {
        r.checks.insert(0, Check::at_most("identity_suite_failures", id.failed as f64, 0.0));
    }
    r.identity = identity;
    r.passed = r.checks.iter().all(|c| c.passed);
    r.stats.wall_clock_s = started.elapsed().as_secs_f64();
    Ok(out)
}

fn empty_report(cfg: &ScenarioConfig, h: &Series, model: &Model) -> ScenarioReport {
    ScenarioReport {
        schema_version: SCHEMA_VERSION,
        name: scenario_name(cfg),
        config: cfg.clone(),
        seed: 0,
        identity: None,
        binding: model.validation.clone(),
        hamiltonian: format_canonical(h),
        thermal_levels: 0,
        thermal_tail: 0.0,
        curves: None,
        visibility: VisibilitySummary {
            initial: 1.0,
            last: 1.0,
            min: 1.0,
            max: 1.0,
            reference: None,
            max_rel_error: None,
            half_time: None,
        },
        ehrenfest: None,
        tuned_support: None,
        checks: vec![Check::at_most("binding_rule_residual", model.validation.max_rule_residual, crate::hilbert::model::RULE_TOL)],
        stats: RunStats {
            wall_clock_s: 0.0,
            steps: cfg.propagator.steps(),
            members: 0,
            branches: 2,
            krylov_substeps: 0,
            max_unitarity_defect: 0.0,
            max_energy_drift: None,
            threads: rayon::current_num_threads(),
        },
        passed: false,
    }
}

fn summarize(v: &[f64]) -> (f64, f64, f64, f64) {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (v[0], v[v.len() - 1], min, max)
}

/// Whether the scenario's branches should dephase thermally.
fn expects_dephasing(cfg: &ScenarioConfig) -> bool {
    match cfg.scenario.tag {
        ScenarioTag::B | ScenarioTag::C => true,
        ScenarioTag::D => cfg.scenario.support == SupportMode::ClassicalTuned,
        ScenarioTag::A => false,
    }
}

/// Reference visibility at the given times: the closed form for linear
/// level spacing, otherwise the pure-phase sum.
fn reference_curve(cfg: &ScenarioConfig, h: &Series, model: &Model, times: &[f64]) -> Result<(String, Vec<f64>), RunError> {
    if cfg.physics.lambda == 0.0 {
        let v = times.iter().map(|&t| visibility_oracle(cfg.physics.nbar, dephasing_angle(cfg, t))).collect();
        return Ok(("closed_form".into(), v));
    }
    Ok(("frozen_phase".into(), frozen_curve(cfg, h, model, times)?.1))
}

/// Pure-phase visibility over the full thermal cutoff.
fn frozen_curve(cfg: &ScenarioConfig, h: &Series, model: &Model, times: &[f64]) -> Result<(Vec<f64>, Vec<f64>), RunError> {
    let nbar = cfg.physics.nbar;
    let n_max = cfg.truncation.n_max.unwrap_or_else(|| thermal_n_max(nbar));
    let weights = thermal_weights(nbar, n_max)?;
    let hb = branch_hamiltonian(h, false)?;
    let (up, down) = branch_positions(cfg);
    let e_up = frozen_energies(&hb, &model.with_scalar("xb", up)?, weights.len())?;
    let e_dn = frozen_energies(&hb, &model.with_scalar("xb", down)?, weights.len())?;
    Ok((weights.clone(), frozen_visibility(&e_up, &e_dn, &weights, cfg.physics.hbar, times)))
}

fn times(cfg: &ScenarioConfig) -> Vec<f64> {
    (0..=cfg.propagator.steps()).map(|k| k as f64 * cfg.propagator.dt).collect()
}

fn run_frozen(cfg: &ScenarioConfig, h: &Series, model: &Model) -> Result<ScenarioOutcome, RunError> {
    let ts = times(cfg);
    let (weights, vis) = frozen_curve(cfg, h, model, &ts)?;
    let p = &cfg.physics;
    let mean_hrel0: f64 = weights.iter().enumerate().map(|(n, w)| w * p.hbar * p.omega_int * (n as f64 + 0.5)).sum();
    let rows: Vec<CurveRow> = ts
        .iter()
        .zip(&vis)
        .map(|(&t, &v)| CurveRow { t, mean_x: 0.0, mean_p: 0.0, var_x: 0.0, mean_hrel0, visibility: v, norm_defect: 0.0 })
        .collect();
    let mut r = empty_report(cfg, h, model);
    r.thermal_levels = weights.len();
    r.thermal_tail = (p.nbar / (p.nbar + 1.0)).powi(weights.len() as i32);
    r.stats.members = weights.len();
    let (initial, last, min, max) = summarize(&vis);
    r.visibility = VisibilitySummary { initial, last, min, max, reference: None, max_rel_error: None, half_time: None };
    if p.lambda == 0.0 {
        let err = ts
            .iter()
            .zip(&vis)
            .map(|(&t, &v)| (v - visibility_oracle(p.nbar, dephasing_angle(cfg, t))).abs())
            .fold(0.0, f64::max);
        r.visibility.reference = Some("closed_form".into());
        r.visibility.max_rel_error = Some(err);
        r.checks.push(Check::at_most("frozen_oracle_abs_error", err, limits::FROZEN_ABS));
    }
    if !expects_dephasing(cfg) {
        r.checks.push(Check::at_most("visibility_loss", 1.0 - min, limits::VISIBILITY_LOSS));
    }
    Ok(ScenarioOutcome { report: r, curves: Curves::from_rows(rows) })
}

fn run_dynamics(cfg: &ScenarioConfig, h: &Series, model: &Model) -> Result<ScenarioOutcome, RunError> {
    let p = &cfg.physics;
    let tr = &cfg.truncation;
    let tuned = cfg.scenario.support == SupportMode::ClassicalTuned;
    let (weights, tail) = ensemble_weights(cfg, tr.d_int)?;
    if tail > tr.ensemble_tail {
        return Err(RunError::EnsembleTail { tail, levels: weights.len(), allowed: tr.ensemble_tail });
    }

    // Symbolic pieces per branch.
    let hb = branch_hamiltonian(h, true)?;
    let acc = symbolic_acceleration(&hb)?;
    let (up, down) = branch_positions(cfg);
    let packet = gaussian_packet(0.0, p.width(), model)?;

    let named = |n: &str| model.operator(n).cloned().ok_or_else(|| HilbertError::Unbound(n.into()));
    let x = named("X")?;
    let px = named("Px")?;
    let x2 = x.mul(&x);
    let px2 = px.mul(&px);
    let hrel0 = named("Hrel0")?;

    struct Full {
        h: Operator,
        b: Option<Operator>,
        a0: Operator,
        a1: Option<Operator>,
    }
    let full_ops = |xb: f64| -> Result<Full, RunError> {
        let m = model.with_scalar("xb", xb)?;
        let h0 = evaluate_hamiltonian(&hb, &m)?;
        let a0 = evaluate(&acc, &m)?;
        if !tuned {
            return Ok(Full { h: h0, b: None, a0, a1: None });
        }
        let m1 = m.with_scalar("u1", 1.0)?;
        let b = evaluate_hamiltonian(&hb, &m1)?.sub(&h0);
        let a1 = evaluate(&acc, &m1)?.sub(&a0);
        Ok(Full { h: h0, b: Some(b), a0, a1: Some(a1) })
    };
    let full = [full_ops(up)?, full_ops(down)?];

    let block = |op: &Operator, n: usize| model.block(op, n);
    let levels: Vec<LevelOps> = (0..weights.len())
        .map(|n| -> Result<LevelOps, RunError> {
            let hr = block(&hrel0, n)?;
            Ok(LevelOps {
                x: block(&x, n)?,
                p: block(&px, n)?,
                x2: block(&x2, n)?,
                p2: block(&px2, n)?,
                hrel0: expect(&hr, &packet),
            })
        })
        .collect::<Result<_, _>>()?;
    let mut tracks: Vec<Track> = Vec::with_capacity(weights.len());
    for (n, &w) in weights.iter().enumerate() {
        let br = |f: &Full| -> Result<BranchOps, RunError> {
            Ok(BranchOps {
                h: block(&f.h, n)?,
                b: f.b.as_ref().map(|b| block(b, n)).transpose()?,
                a0: block(&f.a0, n)?,
                a1: f.a1.as_ref().map(|a| block(a, n)).transpose()?,
            })
        };
        let branches = [br(&full[0])?, br(&full[1])?];
        let e0 = [expect(&branches[0].h, &packet), expect(&branches[1].h, &packet)];
        tracks.push(Track { weight: w, level: n, branches, psi: [packet.clone(), packet.clone()], e0 });
    }

    let pr = &cfg.propagator;
    let krylov = Krylov::new(KrylovOptions::new(pr.krylov_dim, pr.tolerance, pr.unitarity_tol, p.hbar));
    let steps = pr.steps();
    let dt = pr.dt;

    let current = |tracks: &[Track]| -> Vec<[DVector<Complex<f64>>; 2]> { tracks.iter().map(|t| t.psi.clone()).collect() };
    let mut u1 = if tuned { tuned_slope(&tracks, &levels, &current(&tracks), cfg) } else { 0.0 };
    let mut u1_series = vec![u1];
    let first = sample(0.0, &tracks, &levels, u1);
    let mut rows = vec![first.row];
    let mut predicted = vec![first.predicted];
    let mut max_defect: f64 = 0.0;
    let mut substeps = 0usize;
    let mut drift: f64 = 0.0;

    for s in 0..steps {
        let t = s as f64 * dt;
        let u_mid = if tuned {
            let pred: Vec<[DVector<Complex<f64>>; 2]> = tracks
                .par_iter()
                .map(|tr| -> Result<_, HilbertError> {
                    let a = krylov.step(&tr.branches[0].hamiltonian(u1), &tr.psi[0], 0.5 * dt)?.0;
                    let b = krylov.step(&tr.branches[1].hamiltonian(u1), &tr.psi[1], 0.5 * dt)?.0;
                    Ok([a, b])
                })
                .collect::<Result<_, _>>()?;
            tuned_slope(&tracks, &levels, &pred, cfg)
        } else {
            0.0
        };
        let results: Vec<(usize, f64, f64)> = tracks
            .par_iter_mut()
            .map(|tr| -> Result<_, HilbertError> {
                let (mut subs, mut defect, mut dr) = (0, 0.0f64, 0.0f64);
                for b in 0..2 {
                    let hm = tr.branches[b].hamiltonian(u_mid);
                    let (next, k, d) = krylov.checked_step(&hm, &tr.psi[b], dt, s)?;
                    tr.psi[b] = next;
                    subs += k;
                    defect = defect.max(d);
                    if !tuned {
                        let e = expect(&tr.branches[b].h, &tr.psi[b]);
                        dr = dr.max((e - tr.e0[b]).abs() / tr.e0[b].abs().max(f64::MIN_POSITIVE));
                    }
                }
                Ok((subs, defect, dr))
            })
            .collect::<Result<_, _>>()?;
        for (k, d, e) in results {
            substeps += k;
            max_defect = max_defect.max(d);
            drift = drift.max(e);
        }
        if tuned {
            u1 = tuned_slope(&tracks, &levels, &current(&tracks), cfg);
            u1_series.push(u1);
        }
        let smp = sample(t + dt, &tracks, &levels, u1);
        rows.push(smp.row);
        predicted.push(smp.predicted);
    }

    let mut r = empty_report(cfg, h, model);
    r.thermal_levels = weights.len();
    r.thermal_tail = tail;
    r.stats.members = tracks.len();
    r.stats.krylov_substeps = substeps;
    r.stats.max_unitarity_defect = max_defect;
    r.checks.push(Check::at_most("unitarity_defect", max_defect, pr.unitarity_tol));
    if !tuned {
        r.stats.max_energy_drift = Some(drift);
        r.checks.push(Check::at_most("energy_drift", drift, limits::ENERGY_DRIFT));
    } else {
        let (initial, last, min, max) = summarize(&u1_series);
        r.tuned_support = Some(TunedSummary { initial, last, min, max });
    }

    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let vis: Vec<f64> = rows.iter().map(|r| r.visibility).collect();
    let mean_x: Vec<f64> = rows.iter().map(|r| r.mean_x).collect();
    let (initial, last, min, max) = summarize(&vis);
    r.visibility = VisibilitySummary { initial, last, min, max, reference: None, max_rel_error: None, half_time: None };

    let eh = if steps >= 2 { Some(residual_report(&cfg.scenario.tag.to_string(), &ts, &mean_x, &predicted, dt, DEFAULT_TOL)?) } else { None };
    if let Some(e) = &eh {
        r.checks.push(Check::at_most("ehrenfest_residual", e.max_residual, e.tolerance + e.dt2_allowance));
    }

    match (cfg.scenario.tag, cfg.scenario.support) {
        (ScenarioTag::A, _) | (ScenarioTag::D, SupportMode::QuantumOperator) => {
            r.checks.push(Check::at_most("visibility_loss", 1.0 - min, limits::VISIBILITY_LOSS));
        }
        _ => {}
    }
    if cfg.scenario.tag == ScenarioTag::D {
        if let Some(e) = &eh {
            r.checks.push(Check::at_most("max_abs_acceleration_over_g", e.max_abs_numeric / p.g.abs().max(f64::MIN_POSITIVE), limits::ACCEL_REL));
        }
    }
    if expects_dephasing(cfg) {
        let (name, reference) = reference_curve(cfg, h, model, &ts)?;
        let err = ts
            .iter()
            .zip(vis.iter().zip(&reference))
            .filter(|(&t, _)| dephasing_angle(cfg, t).abs() <= std::f64::consts::PI)
            .map(|(_, (v, r))| (v - r).abs() / r.abs())
            .fold(0.0, f64::max);
        r.visibility.reference = Some(name);
        r.visibility.max_rel_error = Some(err);
        r.visibility.half_time = half_visibility_time(cfg);
        if matches!(cfg.scenario.tag, ScenarioTag::B | ScenarioTag::C) {
            r.checks.push(Check::at_most("dephasing_rel_error", err, limits::ORACLE_REL));
            if let Some(th) = r.visibility.half_time.filter(|th| th + dt <= pr.t_max) {
                let crossed = ts.iter().zip(&vis).find(|(_, &v)| v < 0.5).map(|(&t, _)| t).unwrap_or(f64::INFINITY);
                r.checks.push(Check::at_most("visibility_half_time", crossed, th + dt));
            }
        }
    }
    r.ehrenfest = eh;
    Ok(ScenarioOutcome { report: r, curves: Curves::from_rows(rows) })
}

/// Loads, runs and writes one scenario; returns the report and the paths
/// written.
pub fn run_and_write(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<(ScenarioReport, OutputPaths), RunError> {
    let mut out = run_config(cfg, opts)?;
    let paths = output_paths(cfg);
    out.report.curves = Some(paths.curves.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default());
    write_outputs(&out, &paths)?;
    Ok((out.report, paths))
}

/// `H` evaluated on a branch as a full-space operator; exposed for checks
/// that compare scenario matrices directly.
pub fn branch_operator(cfg: &ScenarioConfig, xb: f64) -> Result<Operator, RunError> {
    let table = physics_table();
    let h = hamiltonian(&table, cfg)?;
    let model: HilbertModel<f64> = build_model_from_config(&table, cfg)?;
    let hb = branch_hamiltonian(&h, true)?;
    Ok(evaluate_hamiltonian(&hb, &model.with_scalar("xb", xb)?)?)
}

#[cfg(test)]
mod tests;
