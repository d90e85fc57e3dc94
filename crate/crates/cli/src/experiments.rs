//! One runner per subcommand. Each fills config defaults in place and
//! returns its table, fitted rates and checks.

use crate::artifacts::{num, opt_num, RateEntry, RunOutput, Table};
use crate::config::{fill, fill_vec, ExperimentConfig};
use anyhow::{bail, Result};
use mfc_lab::acceptance::{Lab, CRITERIA};
use mfc_lab::concentration::{calibrated_bound_check, fournier_guillin, run_single_group, ConcentrationConfig};
use mfc_lab::lipnet::{calibrate_hoeffding, hoeffding_margin, tail_experiment, PiecewiseLinearLip};
use mfc_lab::meanfield::{dpp_check, reduced_oracle, solve_mfc, MfcMethod, MfcOptions, MfcProblem};
use mfc_lab::measures::{DiscreteDensity, GaussianMixture, Grid1D, Measure};
use mfc_lab::model::{builtin_model, check_assumptions, ModelConfig};
use mfc_lab::nparticle::{
    lipschitz_check, semiconcavity_check, solve_hjb_with, NParticleProblem, Retention, ValueTensor,
};
use mfc_lab::partition::{build_partition, covering_constant, residual_check};
use mfc_lab::rates::{fit_with_ci, RatePoint};
use mfc_lab::rng::stream_rng;
use rand::Rng;

const DEFAULT_MODEL: &str = "quadratic-mean";
/// Tail points need this many exceedances to count.
const MIN_EXCEEDANCES: usize = 30;

fn model(cfg: &mut ExperimentConfig) -> Result<ModelConfig> {
    let name = cfg.model.get_or_insert_with(|| DEFAULT_MODEL.to_string()).clone();
    Ok(builtin_model(&name, &cfg.params)?)
}

fn n_particle_tensor(
    cfg: &mut ExperimentConfig,
    model: &ModelConfig,
    n: usize,
) -> Result<(NParticleProblem, ValueTensor)> {
    let grid = Grid1D::symmetric(fill(&mut cfg.half_width, 5.0), fill(&mut cfg.points, 101))?;
    let prob = match cfg.time_steps {
        Some(steps) => NParticleProblem::new(model.clone(), n, grid, steps)?,
        None => NParticleProblem::with_cfl(model.clone(), n, grid, fill(&mut cfg.cfl, 0.9))?,
    };
    let every = (prob.n_time_steps / 12).max(1);
    let v = solve_hjb_with(&prob, Retention::Every(every))?;
    Ok((prob, v))
}

pub fn check_model(cfg: &mut ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let model = model(cfg)?;
    let report = check_assumptions(&model, fill(&mut cfg.samples, 1000), seed)?;
    let mut out = RunOutput {
        table: Table::new(&["check", "passed", "samples", "worst_margin", "witness"]),
        ..Default::default()
    };
    for c in &report.checks {
        out.table.push(vec![
            c.name.clone(),
            c.passed.to_string(),
            c.samples.to_string(),
            num(c.worst_margin),
            c.witness.clone().unwrap_or_default(),
        ]);
        out.check(&c.name, c.passed, c.witness.clone().unwrap_or_default());
    }
    Ok(out)
}

/// Grid solves of the `N`-particle equation with regularity diagnostics.
pub fn solve_n(cfg: &mut ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let model = model(cfg)?;
    let samples = fill(&mut cfg.samples, 1000);
    let mut out = RunOutput {
        table: Table::new(&[
            "N",
            "points",
            "time_steps",
            "value_at_origin",
            "scaled_lipschitz",
            "semiconcavity_ratio",
            "reduced_oracle",
        ]),
        ..Default::default()
    };
    for n in fill_vec(&mut cfg.n_list, &[1, 2]) {
        let (prob, v) = n_particle_tensor(cfg, &model, n)?;
        let origin = vec![0.0; n * model.dim];
        let value = v.interpolate(0, &origin);
        let lip = lipschitz_check(&v).value;
        let semi = semiconcavity_check(&v, samples, seed)?.max_ratio;
        // only models whose cost depends on the mean alone have the scalar reduction
        let oracle = reduced_oracle(&model, 1.0 / n as f64 + model.common_noise_a0, 0.0).ok();
        out.metrics.insert(format!("value_n{n}"), value);
        out.table.push(vec![
            n.to_string(),
            prob.axis_grid.n_points().to_string(),
            prob.n_time_steps.to_string(),
            num(value),
            num(lip),
            num(semi),
            opt_num(oracle),
        ]);
    }
    Ok(out)
}

/// Mean-field control from a Gaussian initial density.
pub fn solve_mf(cfg: &mut ExperimentConfig, _seed: u64) -> Result<RunOutput> {
    let model = model(cfg)?;
    let grid = Grid1D::symmetric(fill(&mut cfg.half_width, 8.0), fill(&mut cfg.points, 241))?;
    let prob = MfcProblem::with_cfl(model.clone(), grid, fill(&mut cfg.cfl, 0.9))?;
    let m0 = DiscreteDensity::gaussian(grid, fill(&mut cfg.initial_mean, 0.0), fill(&mut cfg.initial_variance, 0.25))?;
    let sol = solve_mfc(&prob, &m0, MfcMethod::Both)?;
    let tol = MfcOptions::default().tolerance;
    let dpp = dpp_check(&prob, &m0, 0.5 * model.horizon)?;

    let mut out = RunOutput {
        table: Table::new(&["step", "t", "mass", "mean", "variance", "control_min", "control_max"]),
        ..Default::default()
    };
    let width = grid.n_points();
    let controls = sol.control.values();
    for (k, d) in sol.trajectory.densities.iter().enumerate() {
        let (lo, hi) = match controls.get(k * width..(k + 1) * width) {
            Some(row) => row.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x))),
            None => (f64::NAN, f64::NAN),
        };
        let (lo, hi) = if lo.is_finite() { (num(lo), num(hi)) } else { (String::new(), String::new()) };
        out.table.push(vec![
            k.to_string(),
            num(k as f64 * sol.trajectory.dt),
            num(d.mass()),
            num(d.mean()),
            num(d.variance()),
            lo,
            hi,
        ]);
    }
    out.metrics.insert("value".into(), sol.value);
    out.metrics.insert("iterations".into(), sol.iterations as f64);
    out.metrics.insert("dpp_residual".into(), dpp.residual);
    if let (Some(a), Some(b)) = (sol.fixed_point_value, sol.direct_value) {
        out.metrics.insert("fixed_point_value".into(), a);
        out.metrics.insert("direct_value".into(), b);
    }
    out.check("converged", sol.converged, format!("{} iterations", sol.iterations));
    out.check(
        "dynamic programming",
        dpp.residual <= 5.0 * tol,
        format!("residual {:.2e} at T/2, limit {:.0e}", dpp.residual, 5.0 * tol),
    );
    Ok(out)
}

/// `|V^N - U|` at states with mean zero, both from the reduced equation.
pub fn rate(cfg: &mut ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let model = model(cfg)?;
    let y0 = fill(&mut cfg.initial_mean, 0.0);
    let a0 = model.common_noise_a0;
    let limit = reduced_oracle(&model, a0, y0)?;
    let mut out =
        RunOutput { table: Table::new(&["N", "viscosity", "value_n", "value_limit", "gap"]), ..Default::default() };
    let mut points = Vec::new();
    for n in fill_vec(&mut cfg.n_list, &[2, 4, 8, 16, 32]) {
        let nu = 1.0 / n as f64 + a0;
        let vn = reduced_oracle(&model, nu, y0)?;
        let gap = (vn - limit).abs();
        out.table.push(vec![n.to_string(), num(nu), num(vn), num(limit), num(gap)]);
        // the extrapolated oracle is accurate to about 1e-7
        points.push(RatePoint::new(n as f64, gap, 1e-7));
    }
    let fit = fit_with_ci(&points, fill(&mut cfg.bootstrap, 2000), seed)?;
    out.rates.push(RateEntry::new("gap vs N", &fit));
    out.check(
        "decay",
        fit.slope < 0.0 && fit.ci_excludes_zero(),
        format!("slope {:.3} with CI [{:.3}, {:.3}]", fit.slope, fit.ci_lo, fit.ci_hi),
    );
    Ok(out)
}

/// `E W₁(m^N_{Y_h}, m(h))` over `N` for each `h`, with the power-law bound.
pub fn concentration(cfg: &mut ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let dim = fill(&mut cfg.dim, 1);
    let hs = fill_vec(&mut cfg.h_list, &[0.25]);
    let trials = fill(&mut cfg.trials, 200);
    let ns = fill_vec(&mut cfg.n_list, &[100, 1000, 10_000]);
    let resamples = fill(&mut cfg.bootstrap, 2000);
    let beta = 1.0 / (2 * dim + 4) as f64;
    let mut out =
        RunOutput { table: Table::new(&["d", "N", "h", "trial_count", "mean_w1", "stderr"]), ..Default::default() };
    let mut tables = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let c = ConcentrationConfig::gaussian_start(dim, n, hs.clone(), trials, seed.wrapping_add(i as u64))?;
        tables.push(run_single_group(&c)?);
    }
    let mut cases = Vec::new();
    for t in &tables {
        for r in &t.rows {
            out.table.push(vec![
                r.dim.to_string(),
                r.n_particles.to_string(),
                num(r.h),
                r.trials.to_string(),
                num(r.mean_w1),
                num(r.stderr),
            ]);
            if r.h > 0.0 {
                cases.push((*r, t.second_moment));
            }
        }
    }
    for (j, &h) in hs.iter().enumerate() {
        if h == 0.0 || ns.len() < 3 {
            continue;
        }
        let points: Vec<RatePoint> = tables
            .iter()
            .map(|t| RatePoint::new(t.rows[j].n_particles as f64, t.rows[j].mean_w1, t.rows[j].stderr))
            .collect();
        let fit = fit_with_ci(&points, resamples, seed)?;
        out.rates.push(RateEntry::new(format!("mean W1 vs N at h={h}"), &fit));
        out.check(
            format!("exponent at h={h}"),
            fit.ci_hi <= -beta,
            format!("slope {:.3} with CI [{:.3}, {:.3}], bound -{beta:.4}", fit.slope, fit.ci_lo, fit.ci_hi),
        );
    }
    if !cases.is_empty() {
        let b = calibrated_bound_check(&cases, beta)?;
        out.metrics.insert("bound_c_hat".into(), b.c_hat);
        out.metrics.insert("bound_max_ratio".into(), b.max_ratio);
        out.check("calibrated bound", b.pass, format!("max ratio {:.3} with C = {:.3}", b.max_ratio, b.c_hat));
    }
    Ok(out)
}

/// `E W₁(m^n, m)` for a one-dimensional Gaussian `m`.
pub fn fournier_guillin_run(cfg: &mut ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let mean = fill(&mut cfg.initial_mean, 0.0);
    let var = fill(&mut cfg.initial_variance, 1.0);
    let m: Measure = GaussianMixture::normal(mean, var.sqrt())?.into();
    let ns = fill_vec(&mut cfg.n_list, &[100, 1000, 10_000]);
    let r = fournier_guillin(&m, &ns, fill(&mut cfg.trials, 200), seed)?;
    let mut out = RunOutput { table: Table::new(&["n", "mean_w1", "stderr"]), ..Default::default() };
    for p in &r.points {
        out.table.push(vec![(p.n as usize).to_string(), num(p.value), num(p.stderr)]);
    }
    out.metrics.insert("second_moment".into(), r.second_moment);
    match r.fit {
        Some(fit) => {
            out.rates.push(RateEntry::new("mean W1 vs n", &fit));
            out.check(
                "inverse square root rate",
                fit.ci_lo >= -0.6 && fit.ci_hi <= -0.4,
                format!("slope {:.3} with CI [{:.3}, {:.3}] inside [-0.6, -0.4]", fit.slope, fit.ci_lo, fit.ci_hi),
            );
        }
        None => out.check("inverse square root rate", false, "a mean distance is zero; no fit"),
    }
    Ok(out)
}

/// Feedback values of an `N`-particle solve at random states, partitioned at
/// several resolutions.
pub fn partition_demo(cfg: &mut ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let model = model(cfg)?;
    if model.dim != 1 {
        bail!(mfc_lab::Error::Unsupported("partition demo needs d = 1".into()));
    }
    let n = fill_vec(&mut cfg.n_list, &[3])[0];
    let samples = fill(&mut cfg.samples, 200);
    let deltas = fill_vec(&mut cfg.delta_list, &[0.2, 0.1, 0.05]);
    let (_, tensor) = n_particle_tensor(cfg, &model, n)?;
    let ham = model.hamiltonian.clone();
    let radius = ham.constants().control_radius;
    let span = 0.3 * tensor.grid().hi();
    let mut rng = stream_rng(seed, 0);
    let (mut states, mut grads, mut feedback) = (Vec::new(), Vec::new(), Vec::new());
    let mut g = vec![0.0; n];
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-span..span)).collect();
        tensor.gradient(0, &x, &mut g);
        for k in 0..n {
            let p = n as f64 * g[k];
            let mut a = [0.0];
            ham.grad_p_h(&x[k..k + 1], &[p], &mut a);
            states.push(x[k]);
            grads.push(p);
            feedback.push(-a[0]);
        }
    }
    let mut out = RunOutput {
        table: Table::new(&["delta", "cells", "cell_cap", "max_residual", "residual_over_delta"]),
        ..Default::default()
    };
    let mut ratios = Vec::new();
    for &delta in &deltas {
        let part = build_partition(&feedback, 1, radius, delta)?;
        let res = residual_check(&part, &states, &grads, ham.as_ref())?;
        let cap = covering_constant(radius, 1) / delta;
        out.table.push(vec![num(delta), part.n_cells().to_string(), num(cap), num(res.max), num(res.max / delta)]);
        out.check(
            format!("cells at delta={delta}"),
            part.n_cells() as f64 <= cap,
            format!("J = {} ≤ {cap:.1}", part.n_cells()),
        );
        ratios.push(res.max / delta);
    }
    if let Some(&first) = ratios.first() {
        let worst = ratios.iter().copied().fold(0.0, f64::max) / first;
        out.metrics.insert("ratio_growth".into(), worst);
        out.check("residual stability", first > 0.0 && worst <= 2.0, format!("max residual/δ grows by {worst:.3}"));
    }
    Ok(out)
}

/// Exceedance curves of a linear statistic; the Hoeffding constant is fitted
/// on the first `N` and reused for the others.
pub fn tail(cfg: &mut ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let phi = PiecewiseLinearLip::identity(fill(&mut cfg.radius, 2.0))?;
    let h = fill_vec(&mut cfg.h_list, &[1.0])[0];
    let trials = fill(&mut cfg.trials, 100_000);
    let ns = fill_vec(&mut cfg.n_list, &[100, 1000]);
    let mut out =
        RunOutput { table: Table::new(&["N", "x", "exceed_count", "log_freq", "log_bound"]), ..Default::default() };
    let mut c_hat = None;
    for (i, &n) in ns.iter().enumerate() {
        let curve = tail_experiment(&phi, n, h, 0.0, trials, seed.wrapping_add(i as u64))?;
        let c = match c_hat {
            Some(c) => c,
            None => *c_hat.insert(calibrate_hoeffding(&curve, MIN_EXCEEDANCES)?),
        };
        for p in &curve.points {
            let bound = -(n as f64) * p.x * p.x / (c * h);
            out.table.push(vec![n.to_string(), num(p.x), p.exceed_count.to_string(), opt_num(p.log_freq), num(bound)]);
        }
        if i > 0 {
            let margin = hoeffding_margin(&curve, c, MIN_EXCEEDANCES);
            out.metrics.insert(format!("margin_n{n}"), margin);
            out.check(
                format!("tail bound at N={n}"),
                margin <= 0.0,
                format!("max log-excess {margin:.3} with C = {c:.3}"),
            );
        }
    }
    if let Some(c) = c_hat {
        out.metrics.insert("c_hat".into(), c);
    }
    Ok(out)
}

pub fn accept(cfg: &mut ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let ids = fill_vec(&mut cfg.criteria, &(1..=CRITERIA.len()).collect::<Vec<_>>());
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA.len()) {
        bail!(mfc_lab::Error::InvalidConfig(format!("no criterion {bad}; criteria are 1..={}", CRITERIA.len())));
    }
    let mut lab = Lab::new(seed)?;
    let mut out =
        RunOutput { table: Table::new(&["id", "name", "pass", "substitute_pass", "acceptable"]), ..Default::default() };
    for id in ids {
        let o = lab.run(id);
        println!("{}", o.line());
        out.table.push(vec![
            id.to_string(),
            o.name.clone(),
            o.pass.to_string(),
            o.substitute_pass.map(|b| b.to_string()).unwrap_or_default(),
            o.acceptable().to_string(),
        ]);
        for (k, v) in &o.metrics {
            out.metrics.insert(format!("c{id:02}_{k}"), *v);
        }
        out.metrics.insert(format!("c{id:02}_seconds"), o.seconds);
        out.check(format!("C{id:02} {}", o.name), o.acceptable(), o.detail);
    }
    Ok(out)
}
