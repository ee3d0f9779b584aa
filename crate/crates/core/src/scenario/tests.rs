use super::*;

/// Short, small configuration for fast unit tests.
fn small(tag: ScenarioTag) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(tag);
    c.truncation.d_cm = 24;
    c.truncation.d_int = 12;
    c.truncation.ensemble_tail = 1e-3;
    c.propagator.t_max = 40.0;
    c
}

fn quick() -> RunOptions {
    RunOptions { identity_suite: false, seed: 0 }
}

#[test]
fn scenario_a_keeps_visibility() {
    let out = run_config(&small(ScenarioTag::A), &quick()).unwrap();
    assert!(out.report.passed, "{:?}", out.report.checks);
    assert!(out.report.visibility.min > 1.0 - 1e-9);
    assert_eq!(out.curves.len(), 41);
}

#[test]
fn scenario_a_ignores_g() {
    let mut c0 = small(ScenarioTag::A);
    c0.physics.g = 0.0;
    let a = run_config(&small(ScenarioTag::A), &quick()).unwrap();
    let b = run_config(&c0, &quick()).unwrap();
    assert_eq!(a.curves, b.curves);
}

#[test]
fn b_and_c_share_the_branch_matrices() {
    let (up, _) = branch_positions(&small(ScenarioTag::B));
    let hb = branch_operator(&small(ScenarioTag::B), up).unwrap();
    let hc = branch_operator(&small(ScenarioTag::C), up).unwrap();
    assert!(crate::hilbert::relative_frobenius(&hc, &hb) <= 1e-12);
}

#[test]
fn too_small_internal_space_is_a_config_error() {
    let mut c = small(ScenarioTag::B);
    c.truncation.d_int = 4;
    let e = run_config(&c, &quick()).unwrap_err();
    assert!(matches!(e, RunError::EnsembleTail { .. }));
    assert_eq!(e.exit_code(), exit::CONFIG);
}

#[test]
fn frozen_mode_spot_value() {
    let mut c = small(ScenarioTag::B);
    c.scenario.frozen_cm = true;
    // θ = π at the last sample.
    let rate = dephasing_angle(&c, 1.0);
    c.propagator.dt = std::f64::consts::PI / rate / 10.0;
    c.propagator.t_max = std::f64::consts::PI / rate;
    let out = run_config(&c, &quick()).unwrap();
    let v = *out.curves.visibility.last().unwrap();
    assert!((v - 1.0 / 3.0).abs() < 1e-10, "{v}");
    assert!(out.report.passed);
}

#[test]
fn half_time_matches_oracle() {
    let c = small(ScenarioTag::B);
    let t = half_visibility_time(&c).unwrap();
    assert!((visibility_oracle(1.0, dephasing_angle(&c, t)) - 0.5).abs() < 1e-12);
    let mut c0 = c.clone();
    c0.physics.nbar = 0.2;
    assert!(half_visibility_time(&c0).is_none());
}

#[test]
fn order_zero_has_no_dephasing_angle() {
    let mut c = small(ScenarioTag::B);
    c.scenario.order = 0;
    assert_eq!(dephasing_angle(&c, 100.0), 0.0);
}

#[test]
fn overrides_revalidate() {
    let o = Overrides { order: Some(3), ..Default::default() };
    assert!(o.apply(small(ScenarioTag::A)).is_err());
    let o = Overrides { frozen_cm: true, format: Some(OutputFormat::Json), ..Default::default() };
    let c = o.apply(small(ScenarioTag::B)).unwrap();
    assert!(c.scenario.frozen_cm);
    assert_eq!(output_paths(&c).curves.extension().unwrap(), "json");
}

#[test]
fn unbalanced_quantum_support_is_not_hermitian() {
    let mut c = small(ScenarioTag::D);
    c.physics.alpha = 0.75;
    c.physics.beta = 0.25;
    let e = run_config(&c, &quick()).unwrap_err();
    assert_eq!(e.exit_code(), exit::NUMERICAL, "{e}");
}
