//! Bounded 1-Lipschitz test functions: the taper extension, constructive
//! `ε`-nets, net-based lower bounds for `W_1`, and a sub-Gaussian tail
//! experiment for linear statistics of diffusing particles.

use crate::error::invalid;
use crate::measures::{Measure, MixtureCdf};
use crate::numerics::{gauss_legendre, normal_cdf, normal_pdf};
use crate::rng::{pairwise_sum, stream_rng};
use crate::{Error, Result};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest number of net intervals accepted by [`build_net_1d`].
pub const NET_INTERVAL_LIMIT: usize = 24;

const LIP_TOL: f64 = 1e-12;

/// Continuous piecewise-linear function, constant outside its breakpoints,
/// 1-Lipschitz and bounded by `radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearLip {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    radius: f64,
}

impl PiecewiseLinearLip {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, radius: f64) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(invalid("breakpoints and values must be nonempty and of equal length"));
        }
        if !(radius > 0.0) {
            return Err(invalid("radius must be positive"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        for (i, w) in breakpoints.windows(2).enumerate() {
            let slope = (values[i + 1] - values[i]).abs() / (w[1] - w[0]);
            if slope > 1.0 + LIP_TOL {
                return Err(Error::NotLipschitz { slope, segment: i });
            }
        }
        if values.iter().any(|v| !(v.abs() <= radius * (1.0 + LIP_TOL))) {
            return Err(invalid(format!("values must lie in [-{radius}, {radius}]")));
        }
        Ok(Self { breakpoints, values, radius })
    }

    /// `x ↦ clamp(x, -R, R)`.
    pub fn identity(radius: f64) -> Result<Self> {
        Self::new(vec![-radius, radius], vec![-radius, radius], radius)
    }

    pub fn zero(radius: f64) -> Result<Self> {
        Self::new(vec![-radius, radius], vec![0.0, 0.0], radius)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_pl(&self.breakpoints, &self.values, x)
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(b, v)| (v[1] - v[0]).abs() / (b[1] - b[0]))
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Evaluate the piecewise-linear interpolant with constant extension.
fn eval_pl(knots: &[f64], values: &[f64], x: f64) -> f64 {
    let n = knots.len();
    if x <= knots[0] {
        return values[0];
    }
    if x >= knots[n - 1] {
        return values[n - 1];
    }
    let i = knots.partition_point(|&k| k <= x) - 1;
    let t = (x - knots[i]) / (knots[i + 1] - knots[i]);
    values[i] + t * (values[i + 1] - values[i])
}

/// The extension `φ̃` of `φ` from `[-R, R]`: equal to `φ` there, tapered by
/// `(2R - |x|)/R` times `φ(R x/|x|)` for `R < |x| < 2R`, zero beyond.
#[derive(Debug, Clone)]
pub struct TaperExtension {
    phi: PiecewiseLinearLip,
    radius: f64,
}

pub fn extend_tilde(phi: &PiecewiseLinearLip, radius: f64) -> TaperExtension {
    TaperExtension { phi: phi.clone(), radius }
}

impl TaperExtension {
    pub fn eval(&self, x: f64) -> f64 {
        let r = self.radius;
        let ax = x.abs();
        if ax <= r {
            self.phi.eval(x)
        } else if ax < 2.0 * r {
            (2.0 * r - ax) / r * self.phi.eval(r * x.signum())
        } else {
            0.0
        }
    }

    /// Knots and values of the extension as a piecewise-linear function on
    /// `[-2R, 2R]` (zero outside).
    pub fn knots(&self) -> (Vec<f64>, Vec<f64>) {
        let r = self.radius;
        let mut k = vec![-2.0 * r, -r];
        k.extend(self.phi.breakpoints.iter().copied().filter(|&b| b > -r && b < r));
        k.extend([r, 2.0 * r]);
        let v = k.iter().map(|&x| self.eval(x)).collect();
        (k, v)
    }
}

/// `∫ f dm` for a piecewise-linear `f` given by knots and values, constant
/// outside the knots.
pub fn integrate_piecewise_linear(knots: &[f64], values: &[f64], m: &Measure) -> Result<f64> {
    let n = knots.len();
    match m {
        Measure::Empirical(e) => {
            if e.dim() != 1 {
                return Err(Error::DimensionMismatch { expected: 1, found: e.dim() });
            }
            let terms: Vec<f64> = e.points().iter().map(|&x| eval_pl(knots, values, x)).collect();
            Ok(pairwise_sum(&terms) / e.len() as f64)
        }
        Measure::Mixture(g) => {
            let cdf: MixtureCdf = g.cdf()?;
            let s = cdf.std_dev();
            let centers = cdf.centers();
            if s == 0.0 {
                let terms: Vec<f64> = centers.iter().map(|&x| eval_pl(knots, values, x)).collect();
                return Ok(pairwise_sum(&terms) / centers.len() as f64);
            }
            let terms: Vec<f64> = centers
                .iter()
                .map(|&c| {
                    let z = |x: f64| (x - c) / s;
                    // constant tails
                    let mut acc = values[0] * normal_cdf(z(knots[0])) + values[n - 1] * normal_cdf(-z(knots[n - 1]));
                    for i in 0..n - 1 {
                        let (a, b) = (knots[i], knots[i + 1]);
                        let slope = (values[i + 1] - values[i]) / (b - a);
                        let alpha = values[i] - slope * a;
                        let (za, zb) = (z(a), z(b));
                        let mass = normal_cdf(zb) - normal_cdf(za);
                        let first = c * mass - s * (normal_pdf(zb) - normal_pdf(za));
                        acc += alpha * mass + slope * first;
                    }
                    acc
                })
                .collect();
            Ok(pairwise_sum(&terms) / centers.len() as f64)
        }
        Measure::Density(d) => {
            let grid = d.grid();
            let mut pts: Vec<f64> = grid.nodes();
            pts.extend(knots.iter().copied().filter(|&k| grid.contains(k)));
            pts.sort_by(|a, b| a.total_cmp(b));
            pts.dedup();
            let w = d.weights();
            let dens = |x: f64| grid.interpolate(w, x);
            let total: f64 =
                pts.windows(2).map(|p| gauss_legendre(p[0], p[1], |x| eval_pl(knots, values, x) * dens(x))).sum();
            Ok(total)
        }
    }
}

/// An `ε`-net of the bounded 1-Lipschitz functions on `[-R, R]`.
#[derive(Debug, Clone)]
pub struct LipNet {
    epsilon: f64,
    radius: f64,
    members: NetMembers,
}

#[derive(Debug, Clone)]
enum NetMembers {
    /// Lattice paths: values `σ j_i` at `b_i = -R + iσ`, `|j_{i+1} - j_i| ≤ 1`,
    /// `|j_i| ≤ K/2`.
    Lattice {
        intervals: usize,
        spacing: f64,
    },
    Explicit(Vec<PiecewiseLinearLip>),
}

/// Build the slope-quantized net with `K = 2 ceil(R/ε)` intervals of size
/// `σ = R / ceil(R/ε) ≤ ε`.
pub fn build_net_1d(epsilon: f64, radius: f64) -> Result<LipNet> {
    if !(epsilon > 0.0 && radius > 0.0 && epsilon <= radius) {
        return Err(invalid(format!("net needs 0 < ε ≤ R, got ε = {epsilon}, R = {radius}")));
    }
    let half = (radius / epsilon * (1.0 - 1e-12)).ceil() as usize;
    let intervals = 2 * half;
    if intervals > NET_INTERVAL_LIMIT {
        return Err(Error::NetTooLarge { intervals, limit: NET_INTERVAL_LIMIT });
    }
    let spacing = radius / half as f64;
    Ok(LipNet { epsilon, radius, members: NetMembers::Lattice { intervals, spacing } })
}

impl LipNet {
    /// A net given by an explicit member list.
    pub fn explicit(epsilon: f64, radius: f64, members: Vec<PiecewiseLinearLip>) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("a net needs at least one member"));
        }
        Ok(Self { epsilon, radius, members: NetMembers::Explicit(members) })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Upper bound `(K + 1) 3^K` on the member count of a lattice net.
    pub fn size_bound(&self) -> f64 {
        match &self.members {
            NetMembers::Lattice { intervals, .. } => (*intervals as f64 + 1.0) * 3f64.powi(*intervals as i32),
            NetMembers::Explicit(m) => m.len() as f64,
        }
    }

    fn lattice_knots(&self, intervals: usize, spacing: f64) -> Vec<f64> {
        (0..=intervals).map(|i| if i == intervals { self.radius } else { -self.radius + i as f64 * spacing }).collect()
    }

    /// All members, enumerated explicitly.
    pub fn members(&self) -> Vec<PiecewiseLinearLip> {
        match &self.members {
            NetMembers::Explicit(m) => m.clone(),
            NetMembers::Lattice { intervals, spacing } => {
                let knots = self.lattice_knots(*intervals, *spacing);
                let h = (*intervals / 2) as i64;
                let mut out = Vec::new();
                let mut path = vec![0i64; intervals + 1];
                fn rec(i: usize, path: &mut Vec<i64>, h: i64, f: &mut dyn FnMut(&[i64])) {
                    if i == path.len() {
                        f(path);
                        return;
                    }
                    let range: Vec<i64> =
                        if i == 0 { (-h..=h).collect() } else { (path[i - 1] - 1..=path[i - 1] + 1).collect() };
                    for j in range {
                        if j.abs() <= h {
                            path[i] = j;
                            rec(i + 1, path, h, f);
                        }
                    }
                }
                rec(0, &mut path, h, &mut |p: &[i64]| {
                    let values = p.iter().map(|&j| j as f64 * spacing).collect();
                    out.push(PiecewiseLinearLip { breakpoints: knots.clone(), values, radius: self.radius });
                });
                out
            }
        }
    }

    /// A member within `σ ≤ ε` of `phi` in sup norm on `[-R, R]`, by greedy
    /// slope rounding (lattice nets), or the sampled-nearest member otherwise.
    pub fn nearest_member(&self, phi: &PiecewiseLinearLip) -> PiecewiseLinearLip {
        match &self.members {
            NetMembers::Lattice { intervals, spacing } => {
                let knots = self.lattice_knots(*intervals, *spacing);
                let h = (*intervals / 2) as i64;
                let mut j = ((phi.eval(knots[0]) / spacing).round() as i64).clamp(-h, h);
                let mut values = vec![j as f64 * spacing];
                for &b in &knots[1..] {
                    let step = ((phi.eval(b) - j as f64 * spacing) / spacing).round().clamp(-1.0, 1.0) as i64;
                    j = (j + step).clamp(-h, h);
                    values.push(j as f64 * spacing);
                }
                PiecewiseLinearLip { breakpoints: knots, values, radius: self.radius }
            }
            NetMembers::Explicit(m) => {
                let dist = |a: &PiecewiseLinearLip| sup_distance(a, phi, self.radius, 2001);
                m.iter().min_by(|a, b| dist(a).total_cmp(&dist(b))).expect("nonempty net").clone()
            }
        }
    }
}

/// Sampled sup-distance on `[-R, R]`.
pub fn sup_distance(a: &PiecewiseLinearLip, b: &PiecewiseLinearLip, radius: f64, samples: usize) -> f64 {
    let mut pts: Vec<f64> = (0..samples).map(|i| -radius + 2.0 * radius * i as f64 / (samples - 1) as f64).collect();
    pts.extend(a.breakpoints.iter().chain(&b.breakpoints).copied().filter(|x| x.abs() <= radius));
    pts.iter().map(|&x| (a.eval(x) - b.eval(x)).abs()).fold(0.0, f64::max)
}

/// Result of [`dual_lower_bound`].
#[derive(Debug, Clone)]
pub struct DualBound {
    pub value: f64,
    pub maximizer: PiecewiseLinearLip,
}

/// `max_φ ∫ φ̃ d(μ - ν)` over the net; a lower bound for `W_1(μ, ν)`.
pub fn dual_lower_bound(mu: &Measure, nu: &Measure, net: &LipNet) -> Result<DualBound> {
    let r = net.radius;
    match &net.members {
        NetMembers::Explicit(members) => {
            let mut best: Option<DualBound> = None;
            for phi in members {
                let (k, v) = extend_tilde(phi, r).knots();
                let val = integrate_piecewise_linear(&k, &v, mu)? - integrate_piecewise_linear(&k, &v, nu)?;
                if best.as_ref().is_none_or(|b| val > b.value) {
                    best = Some(DualBound { value: val, maximizer: phi.clone() });
                }
            }
            Ok(best.expect("nonempty net"))
        }
        NetMembers::Lattice { intervals, spacing } => {
            let k = *intervals;
            let knots = net.lattice_knots(k, *spacing);
            // nodal basis of the extension on [-2R, b_0, ..., b_K, 2R]
            let mut ext = vec![-2.0 * r];
            ext.extend(&knots);
            ext.push(2.0 * r);
            let mut coef = vec![0.0; k + 1];
            for (i, c) in coef.iter_mut().enumerate() {
                let mut hat = vec![0.0; ext.len()];
                hat[i + 1] = 1.0;
                *c = integrate_piecewise_linear(&ext, &hat, mu)? - integrate_piecewise_linear(&ext, &hat, nu)?;
            }
            // Viterbi over lattice paths
            let h = (k / 2) as i64;
            let width = (2 * h + 1) as usize;
            let mut best: Vec<f64> = (0..width).map(|s| coef[0] * spacing * (s as i64 - h) as f64).collect();
            let mut back = vec![vec![0usize; width]; k + 1];
            for i in 1..=k {
                let mut next = vec![f64::NEG_INFINITY; width];
                for s in 0..width {
                    let mut arg = s;
                    for t in [s.wrapping_sub(1), s, s + 1] {
                        if t < width && best[t] > best[arg] {
                            arg = t;
                        }
                    }
                    next[s] = best[arg] + coef[i] * spacing * (s as i64 - h) as f64;
                    back[i][s] = arg;
                }
                best = next;
            }
            let mut s = (0..width).max_by(|&a, &b| best[a].total_cmp(&best[b])).expect("nonempty");
            let value = best[s];
            let mut states = vec![0usize; k + 1];
            for i in (0..=k).rev() {
                states[i] = s;
                s = back[i][s];
            }
            let values = states.iter().map(|&s| (s as i64 - h) as f64 * spacing).collect();
            Ok(DualBound { value, maximizer: PiecewiseLinearLip { breakpoints: knots, values, radius: r } })
        }
    }
}

/// One point of an empirical exceedance curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailPoint {
    pub x: f64,
    pub exceed_count: usize,
    /// `ln` of the exceedance frequency; `None` when nothing exceeded `x`.
    pub log_freq: Option<f64>,
}

/// Empirical law of `∫ φ d(m(h) - m^N_{Y_h})` over independent trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailCurve {
    pub n_particles: usize,
    pub h: f64,
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
    pub points: Vec<TailPoint>,
}

/// Simulate `N` particles started at the origin, `Y_h = αh + √(2h) Z`, and
/// record the exceedance curve of `∫ φ dm(h) - (1/N) Σ φ(Y^k_h)` where
/// `m(h) = N(αh, 2h)` is the exact law.
pub fn tail_experiment(
    phi: &PiecewiseLinearLip,
    n: usize,
    h: f64,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<TailCurve> {
    if trials < 10_000 {
        return Err(invalid(format!("tail experiment needs at least 10^4 trials, got {trials}")));
    }
    if n < 1 || !(h > 0.0) {
        return Err(invalid("tail experiment needs N ≥ 1 and h > 0"));
    }
    let lip = phi.lipschitz_constant();
    if lip > 1.0 + LIP_TOL {
        return Err(Error::NotLipschitz { slope: lip, segment: 0 });
    }
    let law = Measure::Mixture(crate::measures::GaussianMixture::normal(alpha * h, (2.0 * h).sqrt())?);
    let expected = integrate_piecewise_linear(&phi.breakpoints, &phi.values, &law)?;
    let sd = (2.0 * h).sqrt();
    let stats: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let vals: Vec<f64> = (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    phi.eval(alpha * h + sd * z)
                })
                .collect();
            expected - pairwise_sum(&vals) / n as f64
        })
        .collect();
    let mean = pairwise_sum(&stats) / trials as f64;
    let sq: Vec<f64> = stats.iter().map(|s| (s - mean) * (s - mean)).collect();
    let variance = pairwise_sum(&sq) / (trials - 1) as f64;
    let mut sorted = stats.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let max = *sorted.last().expect("trials > 0");
    let step = variance.sqrt() / 8.0;
    let mut points = Vec::new();
    let mut x: f64 = 0.0;
    let mut j = 0usize;
    loop {
        let count = trials - sorted.partition_point(|&s| s <= x);
        points.push(TailPoint {
            x,
            exceed_count: count,
            log_freq: if count > 0 { Some((count as f64 / trials as f64).ln()) } else { None },
        });
        if count == 0 || step == 0.0 || x > max {
            break;
        }
        j += 1;
        x = j as f64 * step;
    }
    Ok(TailCurve { n_particles: n, h, trials, mean, variance, points })
}

/// Wilson score upper confidence bound for a binomial proportion.
fn wilson_upper(count: usize, trials: usize, z: f64) -> f64 {
    let n = trials as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    let center = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center + half) / (1.0 + z2 / n)).min(1.0)
}

/// Smallest `C` such that the upper confidence bound on every exceedance
/// frequency (with at least `min_count` exceedances, `x > 0`) lies below
/// `exp(-N x² / (C h))`.
pub fn calibrate_hoeffding(curve: &TailCurve, min_count: usize) -> Result<f64> {
    let mut c: f64 = 0.0;
    let mut used = 0;
    for p in curve.points.iter().filter(|p| p.x > 0.0 && p.exceed_count >= min_count) {
        let upper = wilson_upper(p.exceed_count, curve.trials, 3.0);
        if upper >= 1.0 {
            continue;
        }
        c = c.max(curve.n_particles as f64 * p.x * p.x / (curve.h * -upper.ln()));
        used += 1;
    }
    if used == 0 {
        return Err(Error::InsufficientData("no tail points with enough exceedances".into()));
    }
    Ok(c)
}

/// Largest `ln p̂(x) + N x² / (C h)` over points with at least `min_count`
/// exceedances; domination holds when this is `≤ 0`.
pub fn hoeffding_margin(curve: &TailCurve, c: f64, min_count: usize) -> f64 {
    curve
        .points
        .iter()
        .filter(|p| p.x > 0.0 && p.exceed_count >= min_count)
        .filter_map(|p| p.log_freq.map(|l| l + curve.n_particles as f64 * p.x * p.x / (c * curve.h)))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_extension_examples() {
        let id = PiecewiseLinearLip::identity(1.0).unwrap();
        let e = extend_tilde(&id, 1.0);
        assert!((e.eval(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(e.eval(2.0), 0.0);
        assert_eq!(e.eval(-3.0), 0.0);
        let z = extend_tilde(&PiecewiseLinearLip::zero(1.0).unwrap(), 1.0);
        assert_eq!(z.eval(0.3), 0.0);
    }

    #[test]
    fn test_net_sizes() {
        let net = build_net_1d(1.0, 1.0).unwrap();
        let members = net.members();
        assert!(members.len() as f64 <= 27.0);
        assert!(members.iter().any(|m| m.is_zero()));
        assert!(matches!(build_net_1d(0.01, 1.0), Err(Error::NetTooLarge { .. })));
    }

    #[test]
    fn test_rejects_steep_function() {
        assert!(matches!(
            PiecewiseLinearLip::new(vec![0.0, 1.0], vec![0.0, 1.5], 2.0),
            Err(Error::NotLipschitz { .. })
        ));
    }

    #[test]
    fn test_integral_against_gaussian() {
        // ∫ clamp(x, -R, R) dN(μ, 1) for large R is μ
        let phi = PiecewiseLinearLip::identity(40.0).unwrap();
        let m = Measure::Mixture(crate::measures::GaussianMixture::normal(0.7, 1.0).unwrap());
        let v = integrate_piecewise_linear(phi.breakpoints(), phi.values(), &m).unwrap();
        assert!((v - 0.7).abs() < 1e-12);
    }
}
