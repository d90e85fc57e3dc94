//! Log-log rate estimation with parametric bootstrap intervals.

use crate::error::invalid;
use crate::rng::stream_rng;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// A measured value with its standard error at abscissa `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: f64,
    pub value: f64,
    pub stderr: f64,
}

impl RatePoint {
    pub fn new(n: f64, value: f64, stderr: f64) -> Self {
        Self { n, value, stderr }
    }
}

/// Least-squares line through `(log n, log value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl RateFit {
    pub fn ci_excludes_zero(&self) -> bool {
        self.ci_hi < 0.0 || self.ci_lo > 0.0
    }

    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.ln()).exp()
    }
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res <= 1e-28 {
        1.0
    } else {
        0.0
    };
    (slope, intercept, r2)
}

fn validate(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!("a rate fit needs at least 3 points, got {}", points.len())));
    }
    for w in points.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(invalid("abscissae must be strictly increasing"));
        }
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0 && p.1.is_finite())) {
        return Err(invalid(format!("log-log fit needs positive values, got ({}, {})", p.0, p.1)));
    }
    Ok(())
}

/// Closed-form least squares in log-log space; the interval collapses to the slope.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    validate(points)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = ols(&xs, &ys);
    Ok(RateFit { slope, intercept, r_squared, ci_lo: slope, ci_hi: slope })
}

/// 95% percentile interval of the slope under Gaussian perturbation of each
/// value by its standard error. Nonpositive perturbed values are redrawn.
pub fn bootstrap_ci(points: &[RatePoint], resamples: usize, seed: u64) -> Result<(f64, f64)> {
    if resamples < 200 {
        return Err(invalid(format!("bootstrap needs at least 200 resamples, got {resamples}")));
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.n, p.value)).collect();
    validate(&pairs)?;
    let xs: Vec<f64> = points.iter().map(|p| p.n.ln()).collect();
    let mut rng = stream_rng(seed, 0);
    let mut slopes = Vec::with_capacity(resamples);
    let mut ys = vec![0.0; points.len()];
    for _ in 0..resamples {
        for (y, p) in ys.iter_mut().zip(points) {
            let mut v = p.value;
            for _ in 0..10_000 {
                let z: f64 = rng.sample(StandardNormal);
                v = p.value + p.stderr * z;
                if v > 0.0 {
                    break;
                }
            }
            if !(v > 0.0) {
                return Err(invalid(format!("standard error {} swamps value {}", p.stderr, p.value)));
            }
            *y = v.ln();
        }
        slopes.push(ols(&xs, &ys).0);
    }
    slopes.sort_by(|a, b| a.total_cmp(b));
    Ok((quantile(&slopes, 0.025), quantile(&slopes, 0.975)))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - t) + sorted[i + 1] * t
    } else {
        sorted[i]
    }
}

/// Point fit plus bootstrap interval, widened if needed so that it contains
/// the point slope.
pub fn fit_with_ci(points: &[RatePoint], resamples: usize, seed: u64) -> Result<RateFit> {
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.n, p.value)).collect();
    let mut fit = loglog_fit(&pairs)?;
    let (lo, hi) = bootstrap_ci(points, resamples, seed)?;
    fit.ci_lo = lo.min(fit.slope);
    fit.ci_hi = hi.max(fit.slope);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_exact_power_law() {
        let f = loglog_fit(&[(1.0, 1.0), (10.0, 0.1), (100.0, 0.01)]).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn test_constant() {
        let f = loglog_fit(&[(1.0, 3.0), (10.0, 3.0), (100.0, 3.0)]).unwrap();
        assert!(f.slope.abs() < 1e-15);
    }

    #[test]
    fn test_too_few_points() {
        assert!(loglog_fit(&[(2.0, 8.0), (4.0, 1.0)]).is_err());
        assert!(loglog_fit(&[(2.0, 8.0), (4.0, 0.0), (8.0, 1.0)]).is_err());
    }

    #[test]
    fn test_bootstrap_degenerate_and_guard() {
        let pts: Vec<RatePoint> =
            [(1.0, 1.0), (2.0, 0.5), (4.0, 0.25)].iter().map(|&(n, v)| RatePoint::new(n, v, 0.0)).collect();
        let (lo, hi) = bootstrap_ci(&pts, 200, 1).unwrap();
        assert!((lo + 1.0).abs() < 1e-14 && (hi + 1.0).abs() < 1e-14);
        assert!(bootstrap_ci(&pts, 10, 1).is_err());
    }
}
