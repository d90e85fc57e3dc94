//! Monte Carlo experiments on diffusing particle clouds: distance of the
//! empirical measure `m^N_{Y_h}` to its heat flow `m(h) = m^N_{Y_0} ∗ N(αh, 2hI)`,
//! grouped versions, the i.i.d. sampling rate and common-noise invariance.
//!
//! Trials run in parallel on independent streams `stream_id(level, trial)`;
//! means are aggregated in trial order, so results do not depend on the
//! thread count.

use crate::error::invalid;
use crate::measures::{
    pushforward_shift, sample_stream, w1_assignment, w1_assignment_points, w1_cdf, w1_exact_1d, Cdf1d,
    EmpiricalMeasure, GaussianMixture, Measure, SortedAtoms,
};
use crate::rates::{fit_with_ci, RateFit, RatePoint};
use crate::rng::{mean_and_stderr, pairwise_sum, stream_id, stream_rng};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Largest cloud for the `d = 2` assignment distance (cubic cost).
pub const ASSIGNMENT_LIMIT: usize = 2000;

/// Above this many centers the mixture CDF is tabulated once per horizon.
const TABULATE_FROM: usize = 64;

/// Single-group experiment: `Y^k_h = y^k_0 + αh + √(2h) Z^k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub dim: usize,
    pub n_particles: usize,
    pub drift: Vec<f64>,
    pub horizons: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub initial_points: EmpiricalMeasure,
}

impl ConcentrationConfig {
    /// Initial points drawn i.i.d. from `N(0, I)` on a stream reserved for
    /// the initial condition.
    pub fn gaussian_start(
        dim: usize,
        n_particles: usize,
        horizons: Vec<f64>,
        trials: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = stream_rng(seed, u64::MAX);
        let pts = (0..n_particles * dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let cfg = Self {
            dim,
            n_particles,
            drift: vec![0.0; dim],
            horizons,
            trials,
            seed,
            initial_points: EmpiricalMeasure::new(dim, pts)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if self.trials < 30 {
            return Err(invalid(format!("need at least 30 trials, got {}", self.trials)));
        }
        if self.n_particles < 2 {
            return Err(invalid("need at least 2 particles"));
        }
        if self.initial_points.len() != self.n_particles || self.initial_points.dim() != self.dim {
            return Err(invalid("initial points must hold n_particles points of dimension dim"));
        }
        if self.drift.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.drift.len() });
        }
        check_horizons(&self.horizons)?;
        if self.dim == 2 && self.n_particles > ASSIGNMENT_LIMIT {
            return Err(Error::Unsupported(format!("d = 2 assignment limited to {ASSIGNMENT_LIMIT} particles")));
        }
        Ok(())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("dimension {dim}; only d = 1 and d = 2 are supported")))
    }
}

fn check_horizons(hs: &[f64]) -> Result<()> {
    if hs.is_empty() || hs.iter().any(|h| !(*h >= 0.0 && h.is_finite())) {
        return Err(invalid("horizons must be a nonempty list of finite values ≥ 0"));
    }
    Ok(())
}

/// Geometric horizons `T · 2^{-k}`, `k = levels-1, ..., 0`, increasing.
pub fn geometric_horizons(horizon: f64, levels: usize) -> Vec<f64> {
    (0..levels).rev().map(|k| horizon * 0.5f64.powi(k as i32)).collect()
}

/// One row of a concentration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub dim: usize,
    pub n_particles: usize,
    pub h: f64,
    pub trials: usize,
    pub mean_w1: f64,
    pub stderr: f64,
}

/// Per-horizon means for one configuration, with `M₂` of the initial cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationTable {
    pub second_moment: f64,
    pub rows: Vec<ConcentrationRow>,
}

/// Distance target for one horizon: an exact distribution function in
/// `d = 1`, a mixture to sample from in `d = 2`, or the atoms themselves
/// when the mixture has no spread.
enum Target {
    Exact(Box<dyn Cdf1d + Send + Sync>),
    Atoms(Vec<f64>),
    Sampled(GaussianMixture),
}

impl Target {
    fn new(mix: GaussianMixture) -> Result<Self> {
        if mix.dim() != 1 {
            if mix.std_dev() == 0.0 {
                return Ok(Target::Atoms(mix.shifted_centers().points().to_vec()));
            }
            return Ok(Target::Sampled(mix));
        }
        let cdf = mix.cdf()?;
        if cdf.std_dev() == 0.0 {
            let atoms = SortedAtoms::from_sorted(cdf.centers().to_vec());
            return Ok(Target::Exact(Box::new(atoms)));
        }
        if mix.len() >= TABULATE_FROM {
            return Ok(Target::Exact(Box::new(cdf.tabulate(32)?)));
        }
        Ok(Target::Exact(Box::new(cdf)))
    }

    /// `W₁(cloud, target)`; in `d = 2` against a fresh sample of equal size.
    fn distance(&self, dim: usize, cloud: Vec<f64>, rng: &mut ChaCha20Rng) -> Result<f64> {
        match self {
            Target::Exact(cdf) => Ok(w1_cdf(&SortedAtoms::new(cloud), cdf.as_ref())),
            Target::Atoms(atoms) => w1_assignment_points(dim, &cloud, atoms),
            Target::Sampled(mix) => {
                let fresh = mix.sample_with(rng, cloud.len() / dim);
                w1_assignment_points(dim, &cloud, &fresh)
            }
        }
    }
}

fn diffuse(rng: &mut ChaCha20Rng, start: &[f64], dim: usize, drift: &[f64], h: f64) -> Vec<f64> {
    let s = (2.0 * h).sqrt();
    start
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let z: f64 = rng.sample(StandardNormal);
            y + drift[i % dim] * h + s * z
        })
        .collect()
}

fn par_map<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..trials as u64).into_par_iter().map(&f).collect()
}

/// Mean `W₁(m^N_{Y_h}, m(h))` per horizon. `m(h)` is exact; `Y_h` is drawn
/// from its Gaussian law.
pub fn run_single_group(cfg: &ConcentrationConfig) -> Result<ConcentrationTable> {
    cfg.validate()?;
    let d = cfg.dim;
    let mut rows = Vec::with_capacity(cfg.horizons.len());
    for (level, &h) in cfg.horizons.iter().enumerate() {
        let target = Target::new(GaussianMixture::heat_flow(&cfg.initial_points, &cfg.drift, h)?)?;
        let w = par_map(cfg.trials, |t| {
            let mut rng = stream_rng(cfg.seed, stream_id(level as u64, t));
            let cloud = diffuse(&mut rng, cfg.initial_points.points(), d, &cfg.drift, h);
            target.distance(d, cloud, &mut rng)
        })?;
        let (mean_w1, stderr) = mean_and_stderr(&w);
        rows.push(ConcentrationRow { dim: d, n_particles: cfg.n_particles, h, trials: cfg.trials, mean_w1, stderr });
    }
    Ok(ConcentrationTable { second_moment: cfg.initial_points.moment(2.0), rows })
}

/// One subgroup: its initial points and constant drift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticleGroup {
    pub drift: Vec<f64>,
    pub initial_points: EmpiricalMeasure,
}

/// Several subgroups with their own constant drifts; `N = Σ n^j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupedConfig {
    pub dim: usize,
    pub groups: Vec<ParticleGroup>,
}

impl GroupedConfig {
    pub fn total(&self) -> usize {
        self.groups.iter().map(|g| g.initial_points.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if self.groups.is_empty() {
            return Err(invalid("need at least one group"));
        }
        for g in &self.groups {
            if g.initial_points.is_empty() || g.initial_points.dim() != self.dim || g.drift.len() != self.dim {
                return Err(invalid("each group needs ≥ 1 point and drift of dimension dim"));
            }
        }
        if self.dim == 2 && self.total() > ASSIGNMENT_LIMIT {
            return Err(Error::Unsupported(format!("d = 2 assignment limited to {ASSIGNMENT_LIMIT} particles")));
        }
        Ok(())
    }

    /// `m(h) = N^{-1} Σ n^j m^j(h)`.
    fn aggregate(&self, h: f64) -> Result<GaussianMixture> {
        let mut centers = Vec::with_capacity(self.total() * self.dim);
        for g in &self.groups {
            for (i, &x) in g.initial_points.points().iter().enumerate() {
                centers.push(x + g.drift[i % self.dim] * h);
            }
        }
        GaussianMixture::new(self.dim, centers, (2.0 * h).sqrt(), vec![0.0; self.dim])
    }
}

/// Aggregate and per-group means for the grouped experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupedReport {
    pub h: f64,
    pub trials: usize,
    pub aggregate_mean: f64,
    pub aggregate_stderr: f64,
    /// `(mean, stderr)` of each group's own distance.
    pub group_means: Vec<(f64, f64)>,
    /// `Σ (n^j/N) · mean_j`.
    pub weighted_sum: f64,
    /// Largest per-trial `aggregate − Σ (n^j/N) W₁^j`; never positive beyond round-off.
    pub max_excess: f64,
}

/// Pooled empirical measure against the aggregate flow, next to the
/// groupwise distances, all driven by the same noise.
pub fn run_grouped(cfg: &GroupedConfig, h: f64, trials: usize, seed: u64) -> Result<GroupedReport> {
    cfg.validate()?;
    check_horizons(&[h])?;
    if trials < 2 {
        return Err(invalid("need at least 2 trials"));
    }
    let d = cfg.dim;
    let n_total = cfg.total() as f64;
    let weights: Vec<f64> = cfg.groups.iter().map(|g| g.initial_points.len() as f64 / n_total).collect();
    let targets = cfg
        .groups
        .iter()
        .map(|g| GaussianMixture::heat_flow(&g.initial_points, &g.drift, h))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = cfg.aggregate(h)?;
    let exact = if d == 1 {
        Some((targets.iter().cloned().map(Target::new).collect::<Result<Vec<_>>>()?, Target::new(aggregate)?))
    } else {
        None
    };
    let per_trial: Vec<(f64, Vec<f64>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t);
            let clouds: Vec<Vec<f64>> =
                cfg.groups.iter().map(|g| diffuse(&mut rng, g.initial_points.points(), d, &g.drift, h)).collect();
            let pooled: Vec<f64> = clouds.concat();
            match &exact {
                Some((group_targets, agg)) => {
                    let each = clouds
                        .into_iter()
                        .zip(group_targets)
                        .map(|(c, tg)| tg.distance(d, c, &mut rng))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((agg.distance(d, pooled, &mut rng)?, each))
                }
                None => {
                    // fresh samples drawn per group and pooled, so the
                    // groupwise assignments are feasible for the pooled one
                    let fresh: Vec<Vec<f64>> =
                        targets.iter().zip(&clouds).map(|(m, c)| m.sample_with(&mut rng, c.len() / d)).collect();
                    let each = clouds
                        .iter()
                        .zip(&fresh)
                        .map(|(c, f)| w1_assignment_points(d, c, f))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((w1_assignment_points(d, &pooled, &fresh.concat())?, each))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let agg: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
    let (aggregate_mean, aggregate_stderr) = mean_and_stderr(&agg);
    let group_means: Vec<(f64, f64)> =
        (0..cfg.groups.len()).map(|j| mean_and_stderr(&per_trial.iter().map(|p| p.1[j]).collect::<Vec<_>>())).collect();
    let weighted_sum = pairwise_sum(&group_means.iter().zip(&weights).map(|(m, w)| m.0 * w).collect::<Vec<_>>());
    let max_excess = per_trial
        .iter()
        .map(|(a, each)| a - each.iter().zip(&weights).map(|(e, w)| e * w).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GroupedReport { h, trials, aggregate_mean, aggregate_stderr, group_means, weighted_sum, max_excess })
}

/// Effect of starting from `x₀ = y₀ − c` with the same noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OffsetReport {
    pub shift_norm: f64,
    /// Largest `W₁(m^N_{X_h}, m(h)) − W₁(m^N_{Y_h}, m(h)) − |c|`.
    pub max_excess: f64,
    /// Largest `|W₁(m^N_{X_h}, m^N_{Y_h}) − |c||`.
    pub max_pair_error: f64,
}

/// Trials of the configuration at horizon `h` with both starts.
pub fn offset_check(cfg: &ConcentrationConfig, h: f64, shift: &[f64]) -> Result<OffsetReport> {
    cfg.validate()?;
    check_horizons(&[h])?;
    let d = cfg.dim;
    if shift.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: shift.len() });
    }
    let shift_norm = shift.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mix = GaussianMixture::heat_flow(&cfg.initial_points, &cfg.drift, h)?;
    let target = Target::new(mix.clone())?;
    let res: Vec<(f64, f64)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(cfg.seed, t);
            let y = diffuse(&mut rng, cfg.initial_points.points(), d, &cfg.drift, h);
            let x: Vec<f64> = y.iter().enumerate().map(|(i, v)| v - shift[i % d]).collect();
            let pair = w1_assignment_points(d, &x, &y)?;
            let (wx, wy) = match &target {
                Target::Exact(_) | Target::Atoms(_) => {
                    (target.distance(d, x, &mut rng)?, target.distance(d, y, &mut rng)?)
                }
                Target::Sampled(m) => {
                    let fresh = m.sample_with(&mut rng, cfg.n_particles);
                    (w1_assignment_points(d, &x, &fresh)?, w1_assignment_points(d, &y, &fresh)?)
                }
            };
            Ok((wx - wy - shift_norm, (pair - shift_norm).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OffsetReport {
        shift_norm,
        max_excess: res.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
        max_pair_error: res.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

/// Expected distance between `n` i.i.d. samples and their law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingRate {
    pub second_moment: f64,
    pub trials: usize,
    /// `(n, mean W₁, stderr)` per sample size.
    pub points: Vec<RatePoint>,
    /// Log-log fit with bootstrap interval; absent when a mean is zero.
    pub fit: Option<RateFit>,
}

/// `E[W₁(m^n, m)]` for each `n` in `n_list` (one-dimensional `m`).
pub fn fournier_guillin(m: &Measure, n_list: &[usize], trials: usize, seed: u64) -> Result<SamplingRate> {
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: m.dim() });
    }
    if matches!(m, Measure::Empirical(_)) {
        return Err(Error::Unsupported("sampling rate of a point cloud".into()));
    }
    if n_list.len() < 3 || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(invalid("n_list must hold at least 3 strictly increasing sizes ≥ 1"));
    }
    if trials < 2 {
        return Err(invalid("need at least 2 trials"));
    }
    let cdf = m.cdf()?;
    let mut points = Vec::with_capacity(n_list.len());
    for (level, &n) in n_list.iter().enumerate() {
        let w = par_map(trials, |t| {
            let cloud = sample_stream(m, n, seed, stream_id(level as u64, t))?;
            Ok(w1_cdf(&SortedAtoms::new(cloud.points().to_vec()), cdf.as_ref()))
        })?;
        let (mean, se) = mean_and_stderr(&w);
        points.push(RatePoint::new(n as f64, mean, se));
    }
    let fit = if points.iter().all(|p| p.value > 0.0) { Some(fit_with_ci(&points, 2000, seed)?) } else { None };
    Ok(SamplingRate { second_moment: crate::measures::moment(m, 2.0)?, trials, points, fit })
}

/// Common-noise invariance at one horizon.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShiftRow {
    pub h: f64,
    /// Largest `|W₁(Y, m(h) + z) − W₁(Y − z, m(h))|` over trials.
    pub max_difference: f64,
    /// `(mean, stderr)` of `W₁(Y, m(h) + z)` with common noise.
    pub with_noise: (f64, f64),
    /// `(mean, stderr)` of `W₁(Y, m(h))` without it, on independent streams.
    pub without_noise: (f64, f64),
}

fn empirical(m: Measure) -> Result<EmpiricalMeasure> {
    match m {
        Measure::Empirical(e) => Ok(e),
        _ => Err(invalid("expected a point cloud")),
    }
}

/// Distance from a cloud to `flow`: exact in `d = 1` or without spread,
/// against a fresh sample drawn from `rng` otherwise.
fn cloud_to_flow(cloud: &EmpiricalMeasure, flow: &Measure, rng: &mut ChaCha20Rng) -> Result<(f64, Option<Measure>)> {
    if cloud.dim() == 1 {
        return Ok((w1_exact_1d(&cloud.clone().into(), flow)?, None));
    }
    let Measure::Mixture(m) = flow else {
        return Err(invalid("flow must be a mixture"));
    };
    let fresh = if m.std_dev() == 0.0 {
        m.shifted_centers()
    } else {
        EmpiricalMeasure::new(cloud.dim(), m.sample_with(rng, cloud.len()))?
    };
    Ok((w1_assignment(cloud, &fresh)?, Some(fresh.into())))
}

/// Adds a common increment `z = √(2a₀h) Z⁰` to every particle and compares
/// the distance to the shifted flow before and after translating both
/// arguments back by `z`. Also estimates `E[W₁]` without common noise on
/// independent streams.
pub fn common_noise_shift_check(cfg: &ConcentrationConfig, a0: f64) -> Result<Vec<ShiftRow>> {
    cfg.validate()?;
    if !(a0 >= 0.0 && a0.is_finite()) {
        return Err(invalid(format!("common-noise intensity must be ≥ 0, got {a0}")));
    }
    let d = cfg.dim;
    let mut out = Vec::with_capacity(cfg.horizons.len());
    for (level, &h) in cfg.horizons.iter().enumerate() {
        let flow: Measure = GaussianMixture::heat_flow(&cfg.initial_points, &cfg.drift, h)?.into();
        let with: Vec<(f64, f64)> = par_map(cfg.trials, |t| {
            let mut rng = stream_rng(cfg.seed, stream_id(2 * level as u64, t));
            let cloud = diffuse(&mut rng, cfg.initial_points.points(), d, &cfg.drift, h);
            let z: Vec<f64> = (0..d).map(|_| (2.0 * a0 * h).sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
            let back: Vec<f64> = z.iter().map(|v| -v).collect();
            let y = EmpiricalMeasure::new(d, cloud)?.shifted(&z)?;
            let shifted_flow = pushforward_shift(&flow, &z)?;
            let (before, fresh) = cloud_to_flow(&y, &shifted_flow, &mut rng)?;
            let y_back = empirical(pushforward_shift(&y.into(), &back)?)?;
            let after = match fresh {
                None => w1_exact_1d(&y_back.into(), &pushforward_shift(&shifted_flow, &back)?)?,
                Some(f) => w1_assignment(&y_back, &empirical(pushforward_shift(&f, &back)?)?)?,
            };
            Ok(((before - after).abs(), before))
        })?;
        let without: Vec<f64> = par_map(cfg.trials, |t| {
            let mut rng = stream_rng(cfg.seed, stream_id(2 * level as u64 + 1, t));
            let cloud = EmpiricalMeasure::new(d, diffuse(&mut rng, cfg.initial_points.points(), d, &cfg.drift, h))?;
            Ok(cloud_to_flow(&cloud, &flow, &mut rng)?.0)
        })?;
        out.push(ShiftRow {
            h,
            max_difference: with.iter().map(|p| p.0).fold(0.0, f64::max),
            with_noise: mean_and_stderr(&with.iter().map(|p| p.1).collect::<Vec<_>>()),
            without_noise: mean_and_stderr(&without),
        });
    }
    Ok(out)
}

/// Power-law bound `mean ≤ Ĉ (1 + M₂^{1/2}) (h/N)^β`, with `Ĉ` fitted on
/// the first case and held fixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCheck {
    pub beta: f64,
    pub c_hat: f64,
    /// Largest `(mean − 2·stderr) / bound` over all cases.
    pub max_ratio: f64,
    pub pass: bool,
}

/// `cases` are `(row, M₂)` pairs; the first one calibrates the constant.
pub fn calibrated_bound_check(cases: &[(ConcentrationRow, f64)], beta: f64) -> Result<BoundCheck> {
    let shape = |r: &ConcentrationRow, m2: f64| (1.0 + m2.sqrt()) * (r.h / r.n_particles as f64).powf(beta);
    let (first, m2) = cases.first().ok_or_else(|| invalid("no cases to check"))?;
    if !(first.h > 0.0 && first.mean_w1 > 0.0) {
        return Err(invalid("calibration case needs h > 0 and a positive mean"));
    }
    let c_hat = first.mean_w1 / shape(first, *m2);
    let max_ratio = cases
        .iter()
        .map(|(r, m2)| (r.mean_w1 - 2.0 * r.stderr) / (c_hat * shape(r, *m2)))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundCheck { beta, c_hat, max_ratio, pass: max_ratio <= 1.0 })
}

/// CSV with columns `d,N,h,trial_count,mean_w1,stderr`.
pub fn write_rows_csv(path: &Path, rows: &[ConcentrationRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["d", "N", "h", "trial_count", "mean_w1", "stderr"])?;
    for r in rows {
        w.write_record([
            r.dim.to_string(),
            r.n_particles.to_string(),
            format!("{:e}", r.h),
            r.trials.to_string(),
            format!("{:e}", r.mean_w1),
            format!("{:e}", r.stderr),
        ])?;
    }
    w.flush()?;
    Ok(())
}
