use super::EmpiricalMeasure;
use crate::error::invalid;
use crate::numerics::{normal_cdf, normal_pdf};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Number of standard deviations beyond which a component is treated as
/// fully below or above a point (tail mass below 1e-17).
pub const MIXTURE_WINDOW: f64 = 8.5;

/// Equal-weight Gaussian mixture `(1/N) Σ_k N(c_k + offset, σ² I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    dim: usize,
    centers: Vec<f64>,
    std_dev: f64,
    offset: Vec<f64>,
}

impl GaussianMixture {
    pub fn new(dim: usize, centers: Vec<f64>, std_dev: f64, offset: Vec<f64>) -> Result<Self> {
        EmpiricalMeasure::new(dim, centers.clone())?;
        if !(std_dev >= 0.0 && std_dev.is_finite()) {
            return Err(invalid(format!("mixture scale must be finite and nonnegative, got {std_dev}")));
        }
        if offset.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: offset.len() });
        }
        Ok(Self { dim, centers, std_dev, offset })
    }

    /// Heat flow of an empirical measure: `m ∗ N(drift·h, 2h I)`.
    pub fn heat_flow(initial: &EmpiricalMeasure, drift: &[f64], h: f64) -> Result<Self> {
        if !(h >= 0.0) {
            return Err(invalid("time must be nonnegative"));
        }
        let offset = drift.iter().map(|a| a * h).collect();
        Self::new(initial.dim(), initial.points().to_vec(), (2.0 * h).sqrt(), offset)
    }

    /// Single Gaussian `N(mean, std_dev²)` in one dimension.
    pub fn normal(mean: f64, std_dev: f64) -> Result<Self> {
        Self::new(1, vec![0.0], std_dev, vec![mean])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.centers.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Centers translated by the offset.
    pub fn shifted_centers(&self) -> EmpiricalMeasure {
        let pts = self.centers.iter().enumerate().map(|(i, c)| c + self.offset[i % self.dim]).collect();
        EmpiricalMeasure::new(self.dim, pts).expect("centers validated at construction")
    }

    pub fn shifted(&self, z: &[f64]) -> Result<Self> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        let offset = self.offset.iter().zip(z).map(|(a, b)| a + b).collect();
        Ok(Self { offset, ..self.clone() })
    }

    pub fn mean(&self) -> Vec<f64> {
        self.shifted_centers().mean()
    }

    /// `∫ |x|^2 dm`.
    pub fn second_moment(&self) -> f64 {
        self.shifted_centers().moment(2.0) + self.dim as f64 * self.std_dev * self.std_dev
    }

    /// `∫ |x|^p dm`, by composite Gauss-Legendre in one dimension and a
    /// Gauss-Hermite product rule otherwise.
    pub fn moment(&self, p: f64) -> f64 {
        if self.std_dev == 0.0 {
            return self.shifted_centers().moment(p);
        }
        if p == 2.0 {
            return self.second_moment();
        }
        let s = self.std_dev;
        let shifted = self.shifted_centers();
        let n = self.len() as f64;
        if self.dim == 1 {
            let total: f64 = shifted
                .points()
                .iter()
                .map(|&c| {
                    let (a, b) = (c - 10.0 * s, c + 10.0 * s);
                    let f = |x: f64| x.abs().powf(p) * normal_pdf((x - c) / s) / s;
                    if a < 0.0 && b > 0.0 {
                        crate::numerics::composite_gauss_legendre(a, 0.0, 40, f)
                            + crate::numerics::composite_gauss_legendre(0.0, b, 40, f)
                    } else {
                        crate::numerics::composite_gauss_legendre(a, b, 80, f)
                    }
                })
                .sum();
            return total / n;
        }
        // product Gauss-Legendre rule per axis, with the origin as a panel edge
        let d = self.dim;
        let panels = if d == 2 { 12 } else { 5 };
        let mut total = 0.0;
        for k in 0..self.len() {
            let c = shifted.point(k);
            let axes: Vec<Vec<(f64, f64)>> = c.iter().map(|&ci| axis_rule(ci, s, panels)).collect();
            let mut idx = vec![0usize; d];
            loop {
                let mut w = 1.0;
                let mut r2 = 0.0;
                for j in 0..d {
                    let (x, wx) = axes[j][idx[j]];
                    r2 += x * x;
                    w *= wx;
                }
                total += w * r2.sqrt().powf(p);
                let mut j = 0;
                while j < d {
                    idx[j] += 1;
                    if idx[j] < axes[j].len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == d {
                    break;
                }
            }
        }
        total / n
    }

    /// Draw `n` independent samples: a uniformly chosen component plus noise.
    pub fn sample_with<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let k = self.len();
        let d = self.dim;
        let mut out = Vec::with_capacity(n * d);
        for _ in 0..n {
            let j = rng.gen_range(0..k);
            for c in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                out.push(self.centers[j * d + c] + self.offset[c] + self.std_dev * z);
            }
        }
        out
    }

    /// Exact distribution function (one dimension only).
    pub fn cdf(&self) -> Result<MixtureCdf> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim });
        }
        let mut c: Vec<f64> = self.centers.iter().map(|x| x + self.offset[0]).collect();
        c.sort_by(|a, b| a.total_cmp(b));
        Ok(MixtureCdf { centers: c, std_dev: self.std_dev })
    }
}

/// Nodes and weights integrating against the `N(c, s²)` density on
/// `c ± 9s`, split at the origin.
fn axis_rule(c: f64, s: f64, panels: usize) -> Vec<(f64, f64)> {
    let (a, b) = (c - 9.0 * s, c + 9.0 * s);
    let pieces: Vec<(f64, f64)> = if a < 0.0 && b > 0.0 { vec![(a, 0.0), (0.0, b)] } else { vec![(a, b)] };
    let mut out = Vec::new();
    for (lo, hi) in pieces {
        let h = (hi - lo) / panels as f64;
        for k in 0..panels {
            let mid = lo + (k as f64 + 0.5) * h;
            for &(t, w) in crate::numerics::GL5.iter() {
                let x = mid + 0.5 * h * t;
                out.push((x, 0.5 * h * w * normal_pdf((x - c) / s) / s));
            }
        }
    }
    out
}

/// Windowed exact distribution function of a one-dimensional mixture.
#[derive(Debug, Clone)]
pub struct MixtureCdf {
    centers: Vec<f64>,
    std_dev: f64,
}

impl MixtureCdf {
    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn support(&self) -> (f64, f64) {
        let w = MIXTURE_WINDOW * self.std_dev;
        (self.centers[0] - w, self.centers[self.centers.len() - 1] + w)
    }

    fn window(&self, x: f64) -> (usize, usize) {
        let w = MIXTURE_WINDOW * self.std_dev;
        let lo = self.centers.partition_point(|&c| c < x - w);
        let hi = self.centers.partition_point(|&c| c <= x + w);
        (lo, hi)
    }

    /// `F(x)`; for zero scale this is the right-continuous step function.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.centers.len() as f64;
        if self.std_dev == 0.0 {
            return self.centers.partition_point(|&c| c <= x) as f64 / n;
        }
        // components with c > x + w contribute 0, those with c < x - w contribute 1
        let (lo, hi) = self.window(x);
        let s = self.std_dev;
        let inner: f64 = self.centers[lo..hi].iter().map(|&c| normal_cdf((x - c) / s)).sum();
        (lo as f64 + inner) / n
    }

    /// Density and its derivative.
    pub fn density_and_slope(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.window(x);
        let s = self.std_dev;
        let n = self.centers.len() as f64;
        let mut f = 0.0;
        let mut df = 0.0;
        for &c in &self.centers[lo..hi] {
            let z = (x - c) / s;
            let phi = normal_pdf(z);
            f += phi;
            df -= z * phi;
        }
        (f / (n * s), df / (n * s * s))
    }

    /// Quintic Hermite table of the distribution function with spacing
    /// `std_dev / nodes_per_sigma`, for fast repeated evaluation.
    pub fn tabulate(&self, nodes_per_sigma: usize) -> Result<MixtureCdfTable> {
        if self.std_dev == 0.0 {
            return Err(invalid("cannot tabulate a mixture of zero scale"));
        }
        let (lo, hi) = self.support();
        let step = self.std_dev / nodes_per_sigma as f64;
        let n = ((hi - lo) / step).ceil() as usize + 1;
        let mut v = Vec::with_capacity(n);
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for i in 0..n {
            let x = lo + i as f64 * step;
            v.push(self.cdf(x));
            let (f, df) = self.density_and_slope(x);
            d1.push(f);
            d2.push(df);
        }
        Ok(MixtureCdfTable { lo, step, values: v, d1, d2, std_dev: self.std_dev })
    }
}

/// Piecewise quintic Hermite interpolant of a mixture distribution function.
#[derive(Debug, Clone)]
pub struct MixtureCdfTable {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    std_dev: f64,
}

impl MixtureCdfTable {
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.lo + self.step * (self.values.len() - 1) as f64)
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let s = (x - self.lo) / self.step;
        if s <= 0.0 {
            return 0.0;
        }
        let last = self.values.len() - 1;
        if s >= last as f64 {
            return 1.0;
        }
        let i = s.floor() as usize;
        let t = s - i as f64;
        let h = self.step;
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        let h3 = 0.5 * t3 - t4 + 0.5 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let v = h0 * self.values[i]
            + h1 * h * self.d1[i]
            + h2 * h * h * self.d2[i]
            + h3 * h * h * self.d2[i + 1]
            + h4 * h * self.d1[i + 1]
            + h5 * self.values[i + 1];
        v.clamp(0.0, 1.0)
    }
}
