use super::{legendre_transform, MeasureFunctional, MeasureRef, ModelConfig};
use crate::measures::w1_assignment_points;
use crate::rng::stream_rng;
use crate::Result;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Outcome of one sampled assumption test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    /// Largest observed violation margin (positive means violated).
    pub worst_margin: f64,
    /// Description of the sample that produced the worst margin, if it failed.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub model: String,
    pub seed: u64,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tracker {
    name: String,
    samples: usize,
    worst: f64,
    witness: Option<String>,
}

impl Tracker {
    fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), samples: 0, worst: f64::NEG_INFINITY, witness: None }
    }

    /// Record `margin` (violation when positive) with a lazily built witness.
    fn record<W: FnOnce() -> String>(&mut self, margin: f64, witness: W) {
        self.samples += 1;
        let margin = if margin.is_nan() { f64::INFINITY } else { margin };
        if margin > self.worst {
            self.worst = margin;
            if margin > 0.0 {
                self.witness = Some(witness());
            }
        }
    }

    fn finish(self) -> AssumptionCheck {
        AssumptionCheck {
            name: self.name,
            passed: self.worst <= 0.0,
            samples: self.samples,
            worst_margin: self.worst,
            witness: self.witness,
        }
    }
}

fn normal_vec<R: Rng>(rng: &mut R, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit_vec<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v = normal_vec(rng, d, 1.0);
        let n = norm(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| yi + a * xi).collect()
}

/// Test the structural assumptions on `sample_count` random samples each.
///
/// Violations are reported in the returned report, never as errors.
pub fn check_assumptions(cfg: &ModelConfig, sample_count: usize, seed: u64) -> Result<AssumptionReport> {
    if sample_count < 100 {
        return Err(crate::error::invalid(format!("sample_count must be at least 100, got {sample_count}")));
    }
    let h = cfg.hamiltonian.as_ref();
    let k = h.constants();
    let d = cfg.dim;
    let mut checks = Vec::new();

    let mut config = Tracker::new("config");
    config.record(if cfg.horizon > 0.0 { -1.0 } else { 1.0 }, || format!("horizon = {}", cfg.horizon));
    config.record(if cfg.common_noise_a0 >= 0.0 { -1.0 } else { 1.0 }, || format!("a0 = {}", cfg.common_noise_a0));
    checks.push(config.finish());

    // growth and state-gradient growth
    let mut rng = stream_rng(seed, 1);
    let mut growth = Tracker::new("growth");
    let mut xgrowth = Tracker::new("state-gradient-growth");
    let mut g = vec![0.0; d];
    for _ in 0..sample_count {
        let x = normal_vec(&mut rng, d, 3.0);
        let r = 10f64.powf(rng.gen_range(-2.0..3.0));
        let p: Vec<f64> = unit_vec(&mut rng, d).iter().map(|u| u * r).collect();
        let v = h.eval_h(&x, &p);
        let p2 = r * r;
        let tol = 1e-9 * (1.0 + p2);
        let lower = -k.growth_big_c + k.growth_c * p2;
        let upper = k.growth_big_c + p2 / k.growth_c;
        let margin = ((lower - v) / (1.0 + p2)).max((v - upper) / (1.0 + p2)) - tol / (1.0 + p2);
        growth.record(margin, || format!("x = {x:?}, |p| = {r:.4e}, H = {v:.6e}, bounds = [{lower:.6e}, {upper:.6e}]"));
        h.grad_x_h(&x, &p, &mut g);
        let gx = norm(&g);
        let bound = k.growth_big_c * (r + 1.0);
        xgrowth.record((gx - bound) / (1.0 + r) - 1e-12, || {
            format!("x = {x:?}, p = {p:?}, |D_x H| = {gx:.6e} > {bound:.6e}")
        });
    }
    checks.push(growth.finish());
    checks.push(xgrowth.finish());

    // local strict convexity and second-derivative bounds on |p| <= R
    let mut rng = stream_rng(seed, 2);
    let mut convex = Tracker::new("local-convexity");
    let mut hess = Tracker::new("second-derivative-bound");
    let radius = k.control_radius;
    let s = 1e-3;
    let mut gp = vec![0.0; d];
    let mut gm = vec![0.0; d];
    for _ in 0..sample_count {
        let x = normal_vec(&mut rng, d, 3.0);
        let p: Vec<f64> = unit_vec(&mut rng, d).iter().map(|u| u * radius * rng.gen::<f64>()).collect();
        let xi = unit_vec(&mut rng, d);
        let second =
            (h.eval_h(&x, &axpy(s, &xi, &p)) - 2.0 * h.eval_h(&x, &p) + h.eval_h(&x, &axpy(-s, &xi, &p))) / (s * s);
        convex.record(k.convexity_c - second - 1e-4 * (1.0 + second.abs()), || {
            format!("x = {x:?}, p = {p:?}, xi = {xi:?}, second difference = {second:.6e} < {}", k.convexity_c)
        });
        // D^2_pp, D^2_xp and D^2_xx along xi by differencing the closed-form gradients
        let e = 1e-5;
        h.grad_p_h(&x, &axpy(e, &xi, &p), &mut gp);
        h.grad_p_h(&x, &axpy(-e, &xi, &p), &mut gm);
        let dpp = norm(&gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * e)).collect::<Vec<_>>());
        h.grad_p_h(&axpy(e, &xi, &x), &p, &mut gp);
        h.grad_p_h(&axpy(-e, &xi, &x), &p, &mut gm);
        let dxp = norm(&gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * e)).collect::<Vec<_>>());
        h.grad_x_h(&axpy(e, &xi, &x), &p, &mut gp);
        h.grad_x_h(&axpy(-e, &xi, &x), &p, &mut gm);
        let dxx = norm(&gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * e)).collect::<Vec<_>>());
        let worst = dpp.max(dxp).max(dxx);
        hess.record(worst - k.hessian_bound * (1.0 + 1e-6), || {
            format!("x = {x:?}, p = {p:?}: |D2_pp| = {dpp:.4e}, |D2_xp| = {dxp:.4e}, |D2_xx| = {dxx:.4e}")
        });
    }
    checks.push(convex.finish());
    checks.push(hess.finish());

    // Legendre duality and derivative consistency
    let mut rng = stream_rng(seed, 3);
    let mut duality = Tracker::new("legendre-duality");
    let mut dp = Tracker::new("grad-p-consistency");
    let mut dx = Tracker::new("grad-x-consistency");
    let mut da = Tracker::new("grad-a-consistency");
    let duality_samples = sample_count.min(200);
    for i in 0..sample_count {
        let x = normal_vec(&mut rng, d, 2.0);
        let a: Vec<f64> = normal_vec(&mut rng, d, radius.max(1.0));
        let p: Vec<f64> = normal_vec(&mut rng, d, 2.0);
        if i < duality_samples {
            let l = h.eval_l(&x, &a);
            let p_radius = 4.0 * (norm(&a) + radius + 1.0) / k.growth_c.max(1e-3);
            let margin = match legendre_transform(h, &x, &a, p_radius, 11) {
                Ok(num) => (num - l).abs() - 1e-6 * (1.0 + l.abs()),
                Err(_) => f64::INFINITY,
            };
            duality.record(margin, || format!("x = {x:?}, a = {a:?}, L = {l:.8e}"));
        }
        let e = 1e-5;
        let fd_check = |f: &dyn Fn(&[f64]) -> f64, at: &[f64], closed: &[f64]| -> f64 {
            let mut worst: f64 = 0.0;
            for j in 0..d {
                let mut up = at.to_vec();
                let mut dn = at.to_vec();
                up[j] += e;
                dn[j] -= e;
                let fd = (f(&up) - f(&dn)) / (2.0 * e);
                worst = worst.max((fd - closed[j]).abs() / (1.0 + closed[j].abs()));
            }
            worst
        };
        h.grad_p_h(&x, &p, &mut g);
        let m = fd_check(&|q: &[f64]| h.eval_h(&x, q), &p, &g);
        dp.record(m - 1e-6, || format!("x = {x:?}, p = {p:?}, relative error {m:.3e}"));
        h.grad_x_h(&x, &p, &mut g);
        let m = fd_check(&|y: &[f64]| h.eval_h(y, &p), &x, &g);
        dx.record(m - 1e-6, || format!("x = {x:?}, p = {p:?}, relative error {m:.3e}"));
        h.grad_a_l(&x, &a, &mut g);
        let m = fd_check(&|b: &[f64]| h.eval_l(&x, b), &a, &g);
        da.record(m - 1e-6, || format!("x = {x:?}, a = {a:?}, relative error {m:.3e}"));
    }
    checks.push(duality.finish());
    checks.push(dp.finish());
    checks.push(dx.finish());
    checks.push(da.finish());

    // costs
    for (label, functional) in [("running", &cfg.cost.running), ("terminal", &cfg.cost.terminal)] {
        checks.extend(check_functional(label, functional.as_ref(), d, sample_count, seed));
    }

    Ok(AssumptionReport { model: cfg.label.clone(), seed, checks })
}

fn random_cloud<R: Rng>(rng: &mut R, d: usize, n: usize) -> Vec<f64> {
    let center = normal_vec(rng, d, 2.0);
    let scale = 10f64.powf(rng.gen_range(-1.0..0.7));
    (0..n * d).map(|i| center[i % d] + scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn check_functional(
    label: &str,
    f: &dyn MeasureFunctional,
    d: usize,
    sample_count: usize,
    seed: u64,
) -> Vec<AssumptionCheck> {
    let name = |suffix: &str| format!("{label}-cost-{suffix}");
    let mut rng = stream_rng(seed, if label == "running" { 10 } else { 11 });
    let mut bound = Tracker::new(name("bound"));
    let mut normal = Tracker::new(name("normalization"));
    let mut lip = Tracker::new(name("lipschitz"));
    let mut deriv = Tracker::new(name("derivative-consistency"));
    let mut dm = vec![0.0; d];
    for _ in 0..sample_count {
        let n = rng.gen_range(1..40);
        let a = random_cloud(&mut rng, d, n);
        let b = random_cloud(&mut rng, d, n);
        let ma = MeasureRef::uniform(d, &a);
        let mb = MeasureRef::uniform(d, &b);
        let va = f.value(&ma);
        let vb = f.value(&mb);
        bound.record(va.abs() - f.bound() * (1.0 + 1e-12), || format!("value {va:.6e} exceeds bound {}", f.bound()));

        let total = ma.integrate(|x| f.flat_derivative(&ma, x));
        let scale = 1.0 + ma.integrate(|x| f.flat_derivative(&ma, x).abs());
        normal.record(total.abs() - 1e-10 * scale, || format!("∫ flat derivative dm = {total:.3e} on {n} atoms"));

        let w1 = w1_assignment_points(d, &a, &b).unwrap_or(f64::INFINITY);
        let diff = (va - vb).abs();
        lip.record(diff - f.lipschitz() * w1 - 1e-12, || {
            format!("|ΔF| = {diff:.6e} > {} * W1 = {w1:.6e}", f.lipschitz())
        });

        // intrinsic derivative equals the state gradient of the flat derivative
        let x = normal_vec(&mut rng, d, 2.0);
        f.intrinsic_derivative(&ma, &x, &mut dm);
        let e = 1e-5;
        let mut worst: f64 = 0.0;
        for j in 0..d {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[j] += e;
            dn[j] -= e;
            let fd = (f.flat_derivative(&ma, &up) - f.flat_derivative(&ma, &dn)) / (2.0 * e);
            worst = worst.max((fd - dm[j]).abs());
        }
        // flat derivative against the directional derivative along δ_x - m
        let eps = 1e-5;
        let mut pts = a.clone();
        pts.extend_from_slice(&x);
        let shifted = |s: f64| {
            let mut w = vec![(1.0 - s) / n as f64; n];
            w.push(s);
            f.value(&MeasureRef::weighted(d, &pts, &w))
        };
        let directional = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
        let flat = f.flat_derivative(&ma, &x);
        worst = worst.max((directional - flat).abs() / (1.0 + flat.abs()));
        deriv.record(worst - 1e-6, || format!("x = {x:?}: derivative mismatch {worst:.3e}"));
    }
    vec![bound.finish(), normal.finish(), lip.finish(), deriv.finish()]
}
