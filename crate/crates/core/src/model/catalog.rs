use super::{GrowthConstants, HamiltonianModel, MeanFieldCost, ModelConfig, Profile, QuadraticHamiltonian};
use crate::error::invalid;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Named numeric parameters of a catalog model.
pub type ModelParams = BTreeMap<String, f64>;

const COMMON: &[&str] = &["horizon", "dim", "a0", "running_weight", "terminal_weight", "growth_c", "growth_big_c"];

/// Names accepted by [`builtin_model`].
pub fn catalog_names() -> &'static [&'static str] {
    &["quadratic-mean", "quadratic-drift", "nonconvex-mean"]
}

/// Build a model from the catalog.
///
/// * `quadratic-mean`: `H = |p|^2`, `F = k_F atan(mean)`, `G = k_G atan(mean)`.
/// * `quadratic-drift`: `H = |p|^2 + b sin(x)·p`, same costs.
/// * `nonconvex-mean`: `H = |p|^2`, `F = 0`, `G = k exp(-mean^2)`.
///
/// Common parameters: `horizon` (0.5), `dim` (1), `a0` (0), `running_weight`
/// (0), `terminal_weight` (1), and optional overrides `growth_c`,
/// `growth_big_c` which are checked against the model.
pub fn builtin_model(name: &str, params: &ModelParams) -> Result<ModelConfig> {
    let extra: &[&str] = match name {
        "quadratic-mean" => &[],
        "quadratic-drift" => &["drift_amplitude"],
        "nonconvex-mean" => &[],
        _ => return Err(Error::UnknownModel(name.to_string())),
    };
    for key in params.keys() {
        if !COMMON.contains(&key.as_str()) && !extra.contains(&key.as_str()) {
            return Err(invalid(format!("unknown parameter '{key}' for model '{name}'")));
        }
    }
    let get = |k: &str, default: f64| -> Result<f64> {
        let v = params.get(k).copied().unwrap_or(default);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(format!("parameter '{k}' must be finite")))
        }
    };
    let horizon = get("horizon", 0.5)?;
    let a0 = get("a0", 0.0)?;
    let dim_f = get("dim", 1.0)?;
    if dim_f.fract() != 0.0 || !(1.0..=3.0).contains(&dim_f) {
        return Err(invalid(format!("dim must be 1, 2 or 3, got {dim_f}")));
    }
    let dim = dim_f as usize;
    let k_f = get("running_weight", 0.0)?;
    let k_g = get("terminal_weight", 1.0)?;
    let b = if name == "quadratic-drift" { get("drift_amplitude", 0.5)? } else { 0.0 };

    let (running, terminal) = match name {
        "nonconvex-mean" => (Profile::Zero, if k_g == 0.0 { Profile::Zero } else { Profile::Bump { scale: k_g } }),
        _ => (
            if k_f == 0.0 { Profile::Zero } else { Profile::Arctan { scale: k_f } },
            if k_g == 0.0 { Profile::Zero } else { Profile::Arctan { scale: k_g } },
        ),
    };
    // Gronwall-type bound on |p| = N |D_{x^k} V^N|.
    let gradient_bound =
        (terminal.lipschitz() + horizon.max(0.0) * running.lipschitz()) * (b.abs() * horizon.max(0.0)).exp();
    let mut ham = QuadraticHamiltonian::new(dim, b, gradient_bound.max(1e-3));
    let mut constants = ham.constants();
    if let Some(&c) = params.get("growth_c") {
        constants.growth_c = c;
    }
    if let Some(&c) = params.get("growth_big_c") {
        constants.growth_big_c = c;
    }
    if constants != ham.constants() {
        verify_growth(&ham, &constants)?;
        ham = ham.with_constants(constants);
    }

    let cfg = ModelConfig {
        label: name.to_string(),
        dim,
        horizon,
        common_noise_a0: a0,
        hamiltonian: Arc::new(ham),
        cost: MeanFieldCost::of_mean(running, terminal),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn verify_growth(h: &QuadraticHamiltonian, c: &GrowthConstants) -> Result<()> {
    if !(c.growth_c > 0.0 && c.growth_big_c > 0.0) {
        return Err(invalid("growth constants must be positive"));
    }
    let d = h.dim();
    for i in 0..400 {
        let r = 10f64.powf(-2.0 + 5.0 * i as f64 / 399.0);
        for &s in &[-1.0, 1.0] {
            let x: Vec<f64> = (0..d).map(|k| (i + k) as f64 * 0.37).collect();
            let p: Vec<f64> = (0..d).map(|_| s * r / (d as f64).sqrt()).collect();
            let v = h.eval_h(&x, &p);
            let p2 = r * r;
            if v < -c.growth_big_c + c.growth_c * p2 - 1e-9 * (1.0 + p2)
                || v > c.growth_big_c + p2 / c.growth_c + 1e-9 * (1.0 + p2)
            {
                return Err(invalid(format!(
                    "growth constants (c = {}, C = {}) violated at |p| = {r:.3e}",
                    c.growth_c, c.growth_big_c
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MeasureRef;

    #[test]
    fn test_benchmark_defaults() {
        let cfg = builtin_model("quadratic-mean", &ModelParams::new()).unwrap();
        let h = &cfg.hamiltonian;
        assert_eq!(h.eval_l(&[0.0], &[2.0]), 1.0);
        for &x in &[-3.0, 0.0, 1.7] {
            assert_eq!(h.eval_h(&[x], &[0.0]), 0.0);
        }
        assert_eq!(cfg.horizon, 0.5);
        assert_eq!(h.constants().control_radius, 2.0);
        assert!(cfg.mean_structure().is_some());
        let pts = [0.0, 1.0];
        assert!((cfg.cost.eval_g(&MeasureRef::uniform(1, &pts)) - 0.5f64.atan()).abs() < 1e-15);
    }

    #[test]
    fn test_unknown_name_and_param() {
        assert!(matches!(builtin_model("nope", &ModelParams::new()), Err(Error::UnknownModel(_))));
        let mut p = ModelParams::new();
        p.insert("bogus".into(), 1.0);
        assert!(builtin_model("quadratic-mean", &p).is_err());
    }

    #[test]
    fn test_bad_growth_override() {
        let mut p = ModelParams::new();
        p.insert("growth_c".into(), 1.5);
        assert!(builtin_model("quadratic-mean", &p).is_err());
        p.insert("growth_c".into(), 0.25);
        assert!(builtin_model("quadratic-mean", &p).is_ok());
    }

    #[test]
    fn test_bad_horizon() {
        let mut p = ModelParams::new();
        p.insert("horizon".into(), 0.0);
        assert!(builtin_model("quadratic-mean", &p).is_err());
        p.insert("horizon".into(), 1.0);
        p.insert("a0".into(), -1.0);
        assert!(builtin_model("quadratic-mean", &p).is_err());
    }
}
