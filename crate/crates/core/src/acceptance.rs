//! The acceptance suite: twelve numbered criteria, each returning a pass/fail
//! verdict with the measured quantities behind it.
//!
//! The benchmark throughout is `quadratic-mean` (`H = |p|²`, `G = atan(mean)`,
//! `T = 0.5`), whose `N`-particle value reduces to a scalar viscous equation
//! in the mean and whose mean-field value is a Hopf-Lax formula.

use crate::concentration::{
    calibrated_bound_check, common_noise_shift_check, fournier_guillin, run_single_group, ConcentrationConfig,
};
use crate::error::invalid;
use crate::lipnet::{
    build_net_1d, calibrate_hoeffding, dual_lower_bound, hoeffding_margin, tail_experiment, PiecewiseLinearLip,
};
use crate::meanfield::{dpp_check, group_split_value, reduced_oracle, solve_mfc, MfcMethod, MfcOptions, MfcProblem};
use crate::measures::{
    hungarian, w1_assignment, w1_exact_1d, DiscreteDensity, EmpiricalMeasure, GaussianMixture, Grid1D, Measure,
};
use crate::model::{builtin_model, ModelConfig, ModelParams};
use crate::nparticle::{
    lipschitz_check, policy_evaluate_mc, policy_evaluate_mc_with, semiconcavity_check, semiconcavity_check_with,
    solve_hjb_with, NParticleProblem, Retention, ValueTensor,
};
use crate::partition::{build_partition, covering_constant, residual_check};
use crate::rates::{fit_with_ci, loglog_fit, RatePoint};
use crate::rng::stream_rng;
use crate::Result;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::rc::Rc;
use std::time::Instant;

/// Short names of the criteria, indexed from 1.
pub const CRITERIA: [&str; 12] = [
    "reduction identity",
    "convergence rate in N",
    "concentration exponent",
    "sampling rate",
    "uniform Lipschitz bound",
    "uniform semiconcavity",
    "easy inequality",
    "dynamic programming and group splitting",
    "sub-Gaussian tail",
    "common noise",
    "transport exactness",
    "control partition",
];

/// Criteria that cannot hold on the benchmark as stated. Each reports FAIL
/// for the literal statement and evaluates a weaker substitute.
pub const UNATTAINABLE: [usize; 1] = [6];

/// Verdict on one criterion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Outcome {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    /// Verdict of the substitute check of an unattainable criterion.
    pub substitute_pass: Option<bool>,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
    pub seconds: f64,
}

impl Outcome {
    /// Passed, or unattainable with its substitute passing.
    pub fn acceptable(&self) -> bool {
        self.pass || (UNATTAINABLE.contains(&self.id) && self.substitute_pass == Some(true))
    }

    /// One line: `PASS C01 reduction identity (1.2 s): detail`.
    pub fn line(&self) -> String {
        let status = match (self.pass, self.substitute_pass) {
            (true, _) => "PASS",
            (false, Some(true)) => "FAIL (unattainable as stated; substitute PASS)",
            (false, Some(false)) => "FAIL (unattainable as stated; substitute FAIL)",
            (false, None) => "FAIL",
        };
        format!("{} C{:02} {} ({:.1} s): {}", status, self.id, self.name, self.seconds, self.detail)
    }
}

struct Verdict {
    pass: bool,
    substitute: Option<bool>,
    detail: String,
    metrics: BTreeMap<String, f64>,
}

impl Verdict {
    fn new() -> Self {
        Self { pass: true, substitute: None, detail: String::new(), metrics: BTreeMap::new() }
    }

    fn note(&mut self, what: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(what.as_ref());
    }

    fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    fn require(&mut self, ok: bool, what: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(what.as_ref());
        if !ok {
            self.pass = false;
            self.detail.push_str(" [violated]");
        }
    }
}

/// Shared state: the benchmark model and cached grid solves.
pub struct Lab {
    seed: u64,
    cfg: ModelConfig,
    origin: BTreeMap<(usize, usize, u64), f64>,
    tensors: BTreeMap<usize, Rc<ValueTensor>>,
}

/// Axis points of the cached full tensors used by the regularity checks.
const TENSOR_POINTS: usize = 101;
const BOX: f64 = 5.0;

impl Lab {
    pub fn new(seed: u64) -> Result<Self> {
        Ok(Self { seed, cfg: benchmark()?, origin: BTreeMap::new(), tensors: BTreeMap::new() })
    }

    fn problem(&self, n: usize, points: usize, half: f64) -> Result<NParticleProblem> {
        NParticleProblem::with_cfl(self.cfg.clone(), n, Grid1D::symmetric(half, points)?, 0.9)
    }

    /// `V^N(0, 0)` on a grid of `points` per axis over `[-half, half]`.
    fn value_at_origin(&mut self, n: usize, points: usize, half: f64) -> Result<f64> {
        let key = (n, points, half.to_bits());
        if let Some(v) = self.origin.get(&key) {
            return Ok(*v);
        }
        let prob = self.problem(n, points, half)?;
        let v = solve_hjb_with(&prob, Retention::Endpoints)?;
        let value = v.interpolate(0, &vec![0.0; n]);
        self.origin.insert(key, value);
        Ok(value)
    }

    /// Full-horizon tensor on the standard grid, about 12 retained slices.
    fn tensor(&mut self, n: usize) -> Result<Rc<ValueTensor>> {
        if let Some(t) = self.tensors.get(&n) {
            return Ok(t.clone());
        }
        let prob = self.problem(n, TENSOR_POINTS, BOX)?;
        let every = (prob.n_time_steps / 12).max(1);
        let v = Rc::new(solve_hjb_with(&prob, Retention::Every(every))?);
        self.tensors.insert(n, v.clone());
        Ok(v)
    }

    /// Run one criterion; errors become failures with the message as detail.
    pub fn run(&mut self, id: usize) -> Outcome {
        let start = Instant::now();
        let result = match id {
            1 => self.c1(),
            2 => self.c2(),
            3 => self.c3(),
            4 => self.c4(),
            5 => self.c5(),
            6 => self.c6(),
            7 => self.c7(),
            8 => self.c8(),
            9 => self.c9(),
            10 => self.c10(),
            11 => self.c11(),
            12 => self.c12(),
            _ => Err(invalid(format!("no criterion {id}"))),
        };
        let v = result.unwrap_or_else(|e| Verdict {
            pass: false,
            substitute: None,
            detail: format!("error: {e}"),
            metrics: BTreeMap::new(),
        });
        Outcome {
            id,
            name: CRITERIA.get(id.wrapping_sub(1)).copied().unwrap_or("unknown").to_string(),
            pass: v.pass,
            substitute_pass: v.substitute,
            detail: v.detail,
            metrics: v.metrics,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    /// Grid solves at `N ∈ {2, 3}` against the reduced equation with
    /// viscosity `1/N`.
    fn c1(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        for n in [2usize, 3] {
            let oracle = reduced_oracle(&self.cfg, 1.0 / n as f64, 0.0)?;
            let mut errs = Vec::new();
            for pts in [51usize, 101, 201] {
                let e = (self.value_at_origin(n, pts, BOX)? - oracle).abs();
                v.metric(format!("err_n{n}_p{pts}"), e);
                errs.push(((pts - 1) as f64, e));
            }
            let order = -loglog_fit(&errs)?.slope;
            v.metric(format!("order_n{n}"), order);
            v.require(errs[2].1 <= 1e-2, format!("N={n}: error {:.2e} at 201 points ≤ 1e-2", errs[2].1));
            v.require(errs[0].1 > errs[1].1 && errs[1].1 > errs[2].1, format!("N={n}: errors decrease"));
            v.require(order >= 0.9, format!("N={n}: order {order:.2} ≥ 0.9"));
        }
        Ok(v)
    }

    /// Direct tier: grid solves against the mean-field solver; oracle tier:
    /// reduced equation at viscosity `1/N` against viscosity 0.
    fn c2(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let grid = Grid1D::symmetric(8.0, 321)?;
        let m0 = DiscreteDensity::from_points_cic(grid, &EmpiricalMeasure::from_1d(vec![0.0])?)?;
        let u = solve_mfc(&MfcProblem::with_cfl(self.cfg.clone(), grid, 0.9)?, &m0, MfcMethod::Both)?.value;
        v.metric("u_mean_field", u);
        let mut direct = Vec::new();
        for n in 1usize..=4 {
            // Richardson extrapolation of the order-one scheme; the
            // coarse/fine difference serves as the uncertainty
            let (coarse, fine, half) = if n < 4 { (101, 201, BOX) } else { (31, 61, 4.0) };
            let vc = self.value_at_origin(n, coarse, half)?;
            let vf = self.value_at_origin(n, fine, half)?;
            let gap = 2.0 * vf - vc - u;
            v.metric(format!("gap_direct_n{n}"), gap);
            direct.push(RatePoint::new(n as f64, gap.abs(), (vf - vc).abs()));
        }
        let decreasing = direct.windows(2).all(|w| w[1].value < w[0].value);
        let fit = fit_with_ci(&direct, 2000, self.seed)?;
        v.metric("slope_direct", fit.slope);
        v.require(decreasing, "direct gaps strictly decrease over N = 1..4");
        v.require(
            fit.slope < 0.0 && fit.ci_excludes_zero(),
            format!("direct slope {:.3} [{:.3}, {:.3}] < 0", fit.slope, fit.ci_lo, fit.ci_hi),
        );
        let u0 = reduced_oracle(&self.cfg, 0.0, 0.0)?;
        let mut oracle = Vec::new();
        for n in [2usize, 4, 8, 16, 32, 64] {
            let gap = reduced_oracle(&self.cfg, 1.0 / n as f64, 0.0)? - u0;
            v.metric(format!("gap_oracle_n{n}"), gap);
            oracle.push(RatePoint::new(n as f64, gap, 1e-7));
        }
        let fit = fit_with_ci(&oracle, 2000, self.seed)?;
        v.metric("slope_oracle", fit.slope);
        v.require(
            (-1.2..=-0.8).contains(&fit.slope),
            format!("oracle slope {:.3} [{:.3}, {:.3}] in [-1.2, -0.8]", fit.slope, fit.ci_lo, fit.ci_hi),
        );
        Ok(v)
    }

    fn c3(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let h = 0.25;
        let mut points = Vec::new();
        let mut cases = Vec::new();
        for (i, n) in [100usize, 1000, 10_000, 100_000].into_iter().enumerate() {
            let cfg = ConcentrationConfig::gaussian_start(1, n, vec![h], 200, self.seed.wrapping_add(i as u64))?;
            let table = run_single_group(&cfg)?;
            let row = table.rows[0];
            v.metric(format!("mean_w1_n{n}"), row.mean_w1);
            points.push(RatePoint::new(n as f64, row.mean_w1, row.stderr));
            cases.push((row, table.second_moment));
        }
        let fit = fit_with_ci(&points, 2000, self.seed)?;
        v.metric("slope", fit.slope);
        v.metric("ci_lo", fit.ci_lo);
        v.metric("ci_hi", fit.ci_hi);
        v.require(
            fit.ci_hi <= -1.0 / 6.0,
            format!("slope {:.3} with CI [{:.3}, {:.3}] below -1/6", fit.slope, fit.ci_lo, fit.ci_hi),
        );
        v.require(fit.ci_lo >= -0.6 && fit.ci_hi <= -0.4, "CI inside [-0.6, -0.4]");
        let bound = calibrated_bound_check(&cases, 1.0 / 6.0)?;
        v.metric("bound_max_ratio", bound.max_ratio);
        v.require(bound.pass, format!("calibrated (h/N)^(1/6) bound holds, max ratio {:.3}", bound.max_ratio));
        Ok(v)
    }

    fn c4(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let m: Measure = GaussianMixture::normal(0.0, 1.0)?.into();
        let r = fournier_guillin(&m, &[100, 1000, 10_000, 100_000], 200, self.seed)?;
        let fit = r.fit.ok_or_else(|| invalid("zero mean distance"))?;
        v.metric("slope", fit.slope);
        v.metric("ci_lo", fit.ci_lo);
        v.metric("ci_hi", fit.ci_hi);
        v.require(
            fit.ci_lo >= -0.6 && fit.ci_hi <= -0.4,
            format!("slope {:.3} with CI [{:.3}, {:.3}] inside [-0.6, -0.4]", fit.slope, fit.ci_lo, fit.ci_hi),
        );
        Ok(v)
    }

    fn c5(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let mut vals = Vec::new();
        for n in 1usize..=3 {
            let r = lipschitz_check(&*self.tensor(n)?);
            v.metric(format!("lip_n{n}"), r.value);
            vals.push(r.value);
        }
        let (lo, hi) = min_max(&vals);
        let spread = (hi - lo) / hi;
        v.metric("relative_spread", spread);
        v.require(spread < 0.25, format!("N·max|D_k V| = {vals:.4?}, spread {:.1}% < 25%", 100.0 * spread));
        Ok(v)
    }

    /// The joint `(t, x)` quotient picks up `∂²_t V^N`, which near `T`
    /// carries terms of order `N^{-2}` on this benchmark: its supremum is not
    /// within a factor 2 across `N ∈ {1, 2, 3}` (about 6.3, 3.6, 3.0 from the
    /// exact reduced solution at `t ≤ T - 0.02`). The literal check is still
    /// run and reported; the substitute requires purely spatial directions to
    /// agree within a factor 2 and the joint maxima not to grow with `N`
    /// beyond sampling slack.
    fn c6(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let (mut joint, mut space) = (Vec::new(), Vec::new());
        for n in 1usize..=3 {
            let t = self.tensor(n)?;
            let j = semiconcavity_check(&t, 1000, self.seed)?.max_ratio;
            let s = semiconcavity_check_with(&t, 1000, self.seed, false)?.max_ratio;
            v.metric(format!("ratio_n{n}"), j);
            v.metric(format!("space_ratio_n{n}"), s);
            joint.push(j);
            space.push(s);
        }
        let (lo, hi) = min_max(&joint);
        v.require(lo > 0.0 && hi <= 2.0 * lo, format!("joint max ratios {joint:.3?}, max/min = {:.2} ≤ 2", hi / lo));
        let (slo, shi) = min_max(&space);
        let space_ok = slo > 0.0 && shi <= 2.0 * slo;
        let bounded = joint.iter().all(|&r| r <= 1.25 * joint[0]);
        v.substitute = Some(space_ok && bounded);
        v.note(format!(
            "substitute: spatial max ratios {space:.3?}, max/min = {:.2} ≤ 2; joint ratios ≤ 1.25 × N=1 value: {bounded}",
            shi / slo
        ));
        Ok(v)
    }

    /// `V^N(0, x)` against the Monte Carlo cost of the mean-field feedback
    /// computed from `m^N_x`, applied to every particle.
    fn c7(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let grid = Grid1D::symmetric(8.0, 321)?;
        let mf = MfcProblem::with_cfl(self.cfg.clone(), grid, 0.9)?;
        let mut worst = f64::NEG_INFINITY;
        let mut min_gap = f64::INFINITY;
        for n in [2usize, 3] {
            let tensor = self.tensor(n)?;
            let prob = self.problem(n, TENSOR_POINTS, BOX)?;
            let mut rng = stream_rng(self.seed, 700 + n as u64);
            for i in 0..10u64 {
                let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let m0 = DiscreteDensity::from_points_cic(grid, &EmpiricalMeasure::from_1d(x0.clone())?)?;
                let control = solve_mfc(&mf, &m0, MfcMethod::Both)?.control;
                let mc =
                    policy_evaluate_mc_with(&prob, &control, &x0, 4000, self.seed.wrapping_add(100 * n as u64 + i))?;
                let vn = tensor.interpolate(0, &x0);
                worst = worst.max(vn - (mc.mean + 3.0 * mc.stderr));
                min_gap = min_gap.min(mc.mean - vn);
            }
        }
        v.metric("max_excess", worst);
        v.metric("min_gap", min_gap);
        v.require(worst <= 0.0, format!("max of V^N - (cost + 3 SE) over 20 states = {worst:.3e} ≤ 0"));
        Ok(v)
    }

    fn c8(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let grid = Grid1D::symmetric(8.0, 321)?;
        let prob = MfcProblem::with_cfl(self.cfg.clone(), grid, 0.9)?;
        let m0 = DiscreteDensity::gaussian(grid, 0.3, 0.25)?;
        let tol = MfcOptions::default().tolerance;
        let dpp = dpp_check(&prob, &m0, 0.5 * self.cfg.horizon)?;
        v.metric("dpp_residual", dpp.residual);
        v.require(dpp.residual <= 5.0 * tol, format!("DPP residual {:.2e} ≤ {:.0e}", dpp.residual, 5.0 * tol));
        let (a, b) = m0.split_at_node(grid.nearest(0.3))?;
        let split = group_split_value(&prob, &[a, b])?;
        let diff = (split.value - dpp.value).abs();
        v.metric("split_difference", diff);
        v.require(diff <= 1e-3, format!("|U² - U| = {diff:.2e} ≤ 1e-3"));
        Ok(v)
    }

    fn c9(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let phi = PiecewiseLinearLip::identity(2.0)?;
        let min_count = 30;
        let small = tail_experiment(&phi, 100, 1.0, 0.0, 100_000, self.seed)?;
        let c = calibrate_hoeffding(&small, min_count)?;
        let large = tail_experiment(&phi, 1000, 1.0, 0.0, 100_000, self.seed.wrapping_add(1))?;
        let margin = hoeffding_margin(&large, c, min_count);
        v.metric("c_hat", c);
        v.metric("margin_n1000", margin);
        v.require(
            margin <= 0.0,
            format!("Ĉ = {c:.3} from N=100; max log-excess over the bound at N=1000 = {margin:.3} ≤ 0"),
        );
        Ok(v)
    }

    fn c10(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let cfg = ConcentrationConfig::gaussian_start(1, 100, vec![0.25, 0.5], 100, self.seed)?;
        let rows = common_noise_shift_check(&cfg, 0.5)?;
        let max_diff = rows.iter().map(|r| r.max_difference).fold(0.0, f64::max);
        v.metric("shift_max_difference", max_diff);
        v.require(max_diff <= 1e-12, format!("paired shift difference {max_diff:.1e} ≤ 1e-12"));
        let cfg = self.cfg.clone().with_common_noise(0.5);
        let prob = NParticleProblem::with_cfl(cfg, 2, Grid1D::symmetric(BOX, TENSOR_POINTS)?, 0.9)?;
        let tensor = solve_hjb_with(&prob, Retention::All)?;
        let x0 = [0.3, -0.5];
        let value = tensor.interpolate(0, &x0);
        let mc = policy_evaluate_mc(&prob, &tensor, &x0, 20_000, self.seed)?;
        let z = (value - mc.mean).abs() / mc.stderr;
        v.metric("solve_value", value);
        v.metric("mc_mean", mc.mean);
        v.metric("mc_stderr", mc.stderr);
        v.require(
            z <= 3.0,
            format!("a0 = 0.5, N = 2: solve {value:.5} vs MC {:.5} ± {:.5} ({z:.2} SE)", mc.mean, mc.stderr),
        );
        Ok(v)
    }

    fn c11(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let mut rng = stream_rng(self.seed, 1100);
        let mut worst_assign: f64 = 0.0;
        for _ in 0..100 {
            let n = rng.gen_range(2..40);
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let exact = w1_exact_1d(
                &EmpiricalMeasure::from_1d(a.clone())?.into(),
                &EmpiricalMeasure::from_1d(b.clone())?.into(),
            )?;
            let cost: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| (x - y).abs())).collect();
            let perm = hungarian(n, &cost);
            let hung = perm.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum::<f64>() / n as f64;
            let sorted = w1_assignment(&EmpiricalMeasure::from_1d(a)?, &EmpiricalMeasure::from_1d(b)?)?;
            worst_assign = worst_assign.max((exact - hung).abs()).max((exact - sorted).abs());
        }
        v.metric("assignment_max_difference", worst_assign);
        v.require(worst_assign <= 1e-10, format!("|exact - assignment| ≤ {worst_assign:.1e} over 100 clouds"));
        let (eps, radius) = (0.25, 1.0);
        let net = build_net_1d(eps, radius)?;
        let (mut above, mut below): (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for _ in 0..100 {
            let (n, k) = (rng.gen_range(1..30), rng.gen_range(1..30));
            let a: Measure =
                EmpiricalMeasure::from_1d((0..n).map(|_| rng.gen_range(-radius..radius)).collect())?.into();
            let b: Measure =
                EmpiricalMeasure::from_1d((0..k).map(|_| rng.gen_range(-radius..radius)).collect())?.into();
            let exact = w1_exact_1d(&a, &b)?;
            let dual = dual_lower_bound(&a, &b, &net)?.value;
            above = above.max(dual - exact);
            below = below.max(exact - dual);
        }
        v.metric("dual_max_above", above);
        v.metric("dual_max_below", below);
        v.require(above <= 1e-12, format!("dual bound exceeds exact by at most {above:.1e}"));
        v.require(below <= eps, format!("dual bound within {below:.3} ≤ ε = {eps} of exact"));
        Ok(v)
    }

    /// Feedback values `-D_p H(N D_k V^N)` of the `N = 3` solve at 200 random
    /// states, pooled and partitioned at three resolutions.
    fn c12(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let n = 3;
        let tensor = self.tensor(n)?;
        let model = self.cfg.hamiltonian.clone();
        let radius = model.constants().control_radius;
        let mut rng = stream_rng(self.seed, 1200);
        let (mut states, mut grads, mut feedback) = (Vec::new(), Vec::new(), Vec::new());
        let mut g = vec![0.0; n];
        for _ in 0..200 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            tensor.gradient(0, &x, &mut g);
            for k in 0..n {
                let p = n as f64 * g[k];
                let mut a = [0.0];
                model.grad_p_h(&x[k..k + 1], &[p], &mut a);
                states.push(x[k]);
                grads.push(p);
                feedback.push(-a[0]);
            }
        }
        let mut ratios = Vec::new();
        for delta in [0.2, 0.1, 0.05] {
            let part = build_partition(&feedback, 1, radius, delta)?;
            let res = residual_check(&part, &states, &grads, model.as_ref())?;
            let cap = covering_constant(radius, 1) / delta;
            v.metric(format!("residual_d{delta}"), res.max);
            v.metric(format!("cells_d{delta}"), part.n_cells() as f64);
            v.require(part.n_cells() as f64 <= cap, format!("δ={delta}: J = {} ≤ {cap:.0}", part.n_cells()));
            ratios.push(res.max / delta);
        }
        let worst = ratios.iter().copied().fold(0.0, f64::max) / ratios[0];
        v.metric("ratio_growth", worst);
        v.require(
            ratios[0] > 0.0 && worst <= 2.0,
            format!("max residual/δ = {ratios:.4?}, never above 2× its value at δ = 0.2"),
        );
        Ok(v)
    }
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// `quadratic-mean` with default parameters.
pub fn benchmark() -> Result<ModelConfig> {
    builtin_model("quadratic-mean", &ModelParams::new())
}

/// All criteria in order.
pub fn run_all(seed: u64) -> Result<Vec<Outcome>> {
    let mut lab = Lab::new(seed)?;
    Ok((1..=CRITERIA.len()).map(|id| lab.run(id)).collect())
}
