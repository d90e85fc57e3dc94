use mfc_lab::model::{
    builtin_model, catalog_names, check_assumptions, legendre_sup, legendre_transform, GrowthConstants,
    HamiltonianModel, MeasureRef, ModelParams,
};
use mfc_lab::Error;
use proptest::prelude::*;

fn benchmark() -> mfc_lab::model::ModelConfig {
    builtin_model("quadratic-mean", &ModelParams::new()).unwrap()
}

/// `H = |p|⁴` with constants that claim quadratic growth.
#[derive(Debug)]
struct Quartic;

impl HamiltonianModel for Quartic {
    fn dim(&self) -> usize {
        1
    }
    fn eval_h(&self, _x: &[f64], p: &[f64]) -> f64 {
        p[0].powi(4)
    }
    fn grad_p_h(&self, _x: &[f64], p: &[f64], out: &mut [f64]) {
        out[0] = 4.0 * p[0].powi(3);
    }
    fn grad_x_h(&self, _x: &[f64], _p: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
    fn eval_l(&self, _x: &[f64], a: &[f64]) -> f64 {
        // sup_p [-a p - p⁴] at p = -(a/4)^{1/3}
        3.0 * (a[0].abs() / 4.0).powf(4.0 / 3.0)
    }
    fn grad_a_l(&self, _x: &[f64], a: &[f64], out: &mut [f64]) {
        out[0] = a[0].signum() * (a[0].abs() / 4.0).powf(1.0 / 3.0);
    }
    fn constants(&self) -> GrowthConstants {
        GrowthConstants { growth_c: 0.5, growth_big_c: 1.0, control_radius: 4.0, convexity_c: 0.0, hessian_bound: 12.0 }
    }
    fn is_state_independent(&self) -> bool {
        true
    }
}

#[test]
fn benchmark_lagrangian_values() {
    let cfg = benchmark();
    let h = cfg.hamiltonian.as_ref();
    assert_eq!(h.eval_l(&[0.0], &[2.0]), 1.0);
    for x in [-4.0, -0.3, 0.0, 2.5] {
        assert_eq!(h.eval_h(&[x], &[0.0]), 0.0);
        for a in [-3.0, -1.0, 0.5, 2.0] {
            assert!((h.eval_l(&[x], &[a]) - a * a / 4.0).abs() < 1e-15);
        }
    }
}

#[test]
fn legendre_examples() {
    let h = benchmark().hamiltonian;
    assert!(legendre_transform(h.as_ref(), &[0.0], &[0.0], 3.0, 11).unwrap().abs() < 1e-8);
    assert!((legendre_transform(h.as_ref(), &[0.0], &[2.0], 3.0, 11).unwrap() - 1.0).abs() < 1e-8);
    // H = p² + p at a = 1: sup_p (-2p - p²) = 1 at p = -1
    let v = legendre_sup(|p| p[0] * p[0] + p[0], &[1.0], 4.0, 11).unwrap();
    assert!((v - 1.0).abs() < 1e-8);
    assert!(matches!(legendre_transform(h.as_ref(), &[0.0], &[2.0], 0.5, 11), Err(Error::SupremumAtBoundary { .. })));
}

#[test]
fn catalog_models_pass_their_assumptions() {
    for name in catalog_names() {
        let cfg = builtin_model(name, &ModelParams::new()).unwrap();
        let report = check_assumptions(&cfg, 1000, 42).unwrap();
        assert!(report.all_passed(), "{name}: {report:?}");
    }
}

#[test]
fn quartic_growth_is_rejected_with_witness() {
    let mut cfg = benchmark();
    cfg.hamiltonian = std::sync::Arc::new(Quartic);
    let report = check_assumptions(&cfg, 100, 1).unwrap();
    let growth = report.get("growth").unwrap();
    assert!(!growth.passed);
    assert!(growth.witness.as_deref().unwrap().contains("|p|"));
}

#[test]
fn too_few_samples_is_an_error() {
    assert!(check_assumptions(&benchmark(), 0, 1).is_err());
    assert!(check_assumptions(&benchmark(), 99, 1).is_err());
}

#[test]
fn unknown_model_and_bad_params() {
    assert!(matches!(builtin_model("quartic", &ModelParams::new()), Err(Error::UnknownModel(_))));
    let mut p = ModelParams::new();
    p.insert("drift_amplitude".into(), 1.0);
    assert!(builtin_model("quadratic-mean", &p).is_err());
    let mut p = ModelParams::new();
    p.insert("growth_c".into(), 10.0);
    assert!(builtin_model("quadratic-mean", &p).is_err());
}

#[test]
fn flat_derivative_of_mean_cost() {
    let cfg = benchmark();
    let pts = [-1.0, 0.25, 2.0, 0.75];
    let m = MeasureRef::uniform(1, &pts);
    let mean = 0.5;
    let mut total = 0.0;
    for &x in &pts {
        let d = cfg.cost.flat_dg(&m, &[x]);
        assert!((d - (x - mean) / (1.0 + mean * mean)).abs() < 1e-14);
        assert_eq!(cfg.cost.flat_df(&m, &[x]), 0.0);
        total += d;
    }
    assert!(total.abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn double_legendre_round_trip(model in 0usize..3, x in -3.0f64..3.0, p in -2.0f64..2.0) {
        let cfg = builtin_model(catalog_names()[model], &ModelParams::new()).unwrap();
        let h = cfg.hamiltonian.as_ref();
        let back = legendre_sup(|a| h.eval_l(&[x], a), &[p], 12.0, 41).unwrap();
        prop_assert!((back - h.eval_h(&[x], &[p])).abs() < 1e-6);
    }

    #[test]
    fn lagrangian_gradient_matches_central_differences(model in 0usize..3, x in -3.0f64..3.0, a in -3.0f64..3.0) {
        let cfg = builtin_model(catalog_names()[model], &ModelParams::new()).unwrap();
        let h = cfg.hamiltonian.as_ref();
        let mut g = [0.0];
        h.grad_a_l(&[x], &[a], &mut g);
        let e = 1e-4;
        let fd = (h.eval_l(&[x], &[a + e]) - h.eval_l(&[x], &[a - e])) / (2.0 * e);
        prop_assert!((g[0] - fd).abs() < 1e-7);
    }

    #[test]
    fn flat_derivative_has_zero_mean(pts in prop::collection::vec(-5.0f64..5.0, 1..20)) {
        let cfg = benchmark();
        let m = MeasureRef::uniform(1, &pts);
        let total: f64 = pts.iter().map(|&x| cfg.cost.flat_dg(&m, &[x])).sum();
        prop_assert!(total.abs() < 1e-12 * pts.len() as f64);
    }
}
