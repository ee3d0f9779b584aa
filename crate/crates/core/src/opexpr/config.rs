//! Scenario configuration files (TOML with fixed sections).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid configuration: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioTag {
    /// Inertial observer, free particle.
    A,
    /// Accelerated observer, free particle.
    B,
    /// Inertial observer, accelerating potential.
    C,
    /// Accelerated observer, particle supported.
    D,
}

impl fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::A => "a",
            Self::B => "b",
            Self::C => "c",
            Self::D => "d",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportMode {
    #[default]
    None,
    ClassicalTuned,
    QuantumOperator,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_order() -> u8 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub tag: ScenarioTag,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub support: SupportMode,
    /// Highest ε order kept in the Hamiltonian (0 or 1).
    #[serde(default = "default_order")]
    pub order: u8,
    /// Adds ε·½Mg²X² (curvature hook).
    #[serde(default)]
    pub curvature: bool,
    /// Pure-phase evaluation with the c.m. motion frozen.
    #[serde(default)]
    pub frozen_cm: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub hbar: f64,
    pub mass: f64,
    pub g: f64,
    pub c: f64,
    pub omega_int: f64,
    /// Hrel1 = −λ(n + ½)².
    pub lambda: f64,
    pub nbar: f64,
    pub delta_x: f64,
    pub branch_center: f64,
    /// Packet width; defaults to the ground-state width of the c.m. basis.
    pub packet_width: Option<f64>,
    pub omega_cm: f64,
    /// Ordering weights of the quantum support potential (α + β = 1).
    pub alpha: f64,
    pub beta: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 10.0,
            g: 1e-3,
            c: 10.0,
            omega_int: 1.0,
            lambda: 0.0,
            nbar: 1.0,
            delta_x: 100.0,
            branch_center: 0.0,
            packet_width: None,
            omega_cm: 0.1,
            alpha: 0.5,
            beta: 0.5,
        }
    }
}

impl PhysicsSection {
    pub fn eps(&self) -> f64 {
        1.0 / (self.c * self.c)
    }

    pub fn ground_width(&self) -> f64 {
        (self.hbar / (self.mass * self.omega_cm)).sqrt()
    }

    pub fn width(&self) -> f64 {
        self.packet_width.unwrap_or_else(|| self.ground_width())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    pub d_cm: usize,
    pub d_int: usize,
    /// Thermal cutoff; defaults to the 1e-10 tail bound.
    pub n_max: Option<usize>,
    /// Largest thermal weight allowed outside the D_int levels that the
    /// propagated ensemble can hold.
    pub ensemble_tail: f64,
}

impl Default for TruncationSection {
    fn default() -> Self {
        Self { d_cm: 32, d_int: 16, n_max: None, ensemble_tail: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorSection {
    pub dt: f64,
    pub t_max: f64,
    pub krylov_dim: usize,
    pub tolerance: f64,
    pub unitarity_tol: f64,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        Self { dt: 1.0, t_max: 3200.0, krylov_dim: 24, tolerance: 1e-12, unitarity_tol: 1e-9 }
    }
}

impl PropagatorSection {
    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: OutputFormat::Csv }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default)]
    pub propagator: PropagatorSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ScenarioConfig {
    /// Defaults for a given tag, with the support mode it requires.
    pub fn new(tag: ScenarioTag) -> Self {
        let support = if tag == ScenarioTag::D { SupportMode::QuantumOperator } else { SupportMode::None };
        Self {
            scenario: ScenarioSection { tag, name: None, support, order: 1, curvature: false, frozen_cm: false },
            physics: PhysicsSection::default(),
            truncation: TruncationSection::default(),
            propagator: PropagatorSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Schema(e.to_string().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Lists every violated constraint.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut bad = Vec::new();
        let s = &self.scenario;
        let p = &self.physics;
        let t = &self.truncation;
        let pr = &self.propagator;
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                bad.push(msg.to_string());
            }
        };
        check(s.order <= 1, "scenario.order must be 0 or 1");
        check(t.d_cm >= 2, "truncation.d_cm must be >= 2");
        check(t.d_int >= 2, "truncation.d_int must be >= 2");
        check(t.ensemble_tail > 0.0 && t.ensemble_tail < 1.0, "truncation.ensemble_tail must lie in (0, 1)");
        check(pr.dt > 0.0, "propagator.dt must be > 0");
        check(pr.t_max >= pr.dt, "propagator.t_max must be >= propagator.dt");
        check(pr.krylov_dim >= 2, "propagator.krylov_dim must be >= 2");
        check(pr.tolerance > 0.0, "propagator.tolerance must be > 0");
        check(pr.unitarity_tol > 0.0, "propagator.unitarity_tol must be > 0");
        check(p.c.is_finite() && p.c * p.c > 0.0, "physics.c must give c^2 > 0");
        check(p.nbar >= 0.0, "physics.nbar must be >= 0");
        check(p.hbar > 0.0, "physics.hbar must be > 0");
        check(p.mass > 0.0, "physics.mass must be > 0");
        check(p.omega_int > 0.0, "physics.omega_int must be > 0");
        check(p.omega_cm > 0.0, "physics.omega_cm must be > 0");
        check(p.packet_width.is_none_or(|w| w > 0.0), "physics.packet_width must be > 0");
        for (name, v) in [("g", p.g), ("lambda", p.lambda), ("delta_x", p.delta_x), ("branch_center", p.branch_center)] {
            check(v.is_finite(), &format!("physics.{name} must be finite"));
        }
        match (s.tag, s.support) {
            (ScenarioTag::A | ScenarioTag::C, m) if m != SupportMode::None => {
                check(false, "scenario.support must be none for tags a and c")
            }
            (ScenarioTag::D, SupportMode::None) => check(false, "scenario d needs scenario.support other than none"),
            _ => {}
        }
        if s.support == SupportMode::ClassicalTuned {
            check(s.order == 1, "classical_tuned support needs scenario.order = 1");
        }
        if s.support == SupportMode::QuantumOperator {
            check((p.alpha + p.beta - 1.0).abs() <= 1e-12, "physics.alpha + physics.beta must equal 1");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(bad))
        }
    }
}

pub fn parse_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    ScenarioConfig::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_b_uses_defaults() {
        let c = ScenarioConfig::from_toml_str("[scenario]\ntag = \"b\"\n").unwrap();
        assert_eq!(c.scenario.support, SupportMode::None);
        assert_eq!(c.truncation.d_cm, 32);
        assert_eq!(c.scenario.order, 1);
    }

    #[test]
    fn d_with_quantum_support() {
        let c = ScenarioConfig::from_toml_str("[scenario]\ntag = \"d\"\nsupport = \"quantum_operator\"\n").unwrap();
        assert_eq!(c.scenario.support, SupportMode::QuantumOperator);
    }

    #[test]
    fn small_internal_space_rejected() {
        let e = ScenarioConfig::from_toml_str("[scenario]\ntag = \"b\"\n[truncation]\nd_int = 1\n").unwrap_err();
        assert!(e.to_string().contains("d_int"), "{e}");
    }

    #[test]
    fn unknown_key_is_named() {
        let e = ScenarioConfig::from_toml_str("[scenario]\ntag = \"b\"\n[physics]\ngravity = 1.0\n").unwrap_err();
        assert!(matches!(e, ConfigError::Schema(_)));
        assert!(e.to_string().contains("gravity"), "{e}");
    }

    #[test]
    fn toml_round_trip() {
        let c = ScenarioConfig::new(ScenarioTag::D);
        assert_eq!(ScenarioConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }
}
