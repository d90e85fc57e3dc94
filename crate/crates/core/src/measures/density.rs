use super::{EmpiricalMeasure, Grid1D};
use crate::error::invalid;
use crate::numerics::GL5;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Piecewise-linear density on a one-dimensional grid, given by its nodal values.
///
/// Probability densities have unit trapezoid mass; partial densities (used for
/// splitting a population into groups) may carry any nonnegative mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDensity {
    grid: Grid1D,
    weights: Vec<f64>,
}

impl DiscreteDensity {
    /// Probability density; the trapezoid mass must equal 1 within `1e-9`.
    pub fn new(grid: Grid1D, weights: Vec<f64>) -> Result<Self> {
        let d = Self::partial(grid, weights)?;
        let mass = d.mass();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("density has mass {mass}, expected 1")));
        }
        Ok(d)
    }

    /// Nonnegative density of arbitrary mass.
    pub fn partial(grid: Grid1D, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.n_points() {
            return Err(Error::DimensionMismatch { expected: grid.n_points(), found: weights.len() });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("density weights must be finite and nonnegative"));
        }
        Ok(Self { grid, weights })
    }

    /// Rescale nonnegative nodal values to unit mass.
    pub fn normalized(grid: Grid1D, weights: Vec<f64>) -> Result<Self> {
        let d = Self::partial(grid, weights)?;
        let mass = d.mass();
        if !(mass > 0.0) {
            return Err(invalid("cannot normalize a density of zero mass"));
        }
        let weights = d.weights.iter().map(|w| w / mass).collect();
        Ok(Self { grid, weights })
    }

    /// Gaussian `N(mean, variance)` sampled at the nodes and renormalized.
    pub fn gaussian(grid: Grid1D, mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(invalid("variance must be positive"));
        }
        let w = grid.nodes().iter().map(|x| (-(x - mean) * (x - mean) / (2.0 * variance)).exp()).collect();
        Self::normalized(grid, w)
    }

    pub fn uniform(grid: Grid1D) -> Self {
        let w = 1.0 / (grid.hi() - grid.lo());
        Self { grid, weights: vec![w; grid.n_points()] }
    }

    /// Cloud-in-cell deposit of a one-dimensional point cloud. Points outside
    /// the grid are an error. The mean of the nodal masses equals the cloud mean.
    pub fn from_points_cic(grid: Grid1D, cloud: &EmpiricalMeasure) -> Result<Self> {
        if cloud.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: cloud.dim() });
        }
        let mut masses = vec![0.0; grid.n_points()];
        let share = 1.0 / cloud.len() as f64;
        for &x in cloud.points() {
            if !grid.contains(x) {
                return Err(invalid(format!("point {x} lies outside the grid")));
            }
            let (i, t) = grid.locate(x);
            masses[i] += share * (1.0 - t);
            masses[i + 1] += share * t;
        }
        let tau = grid.trapezoid_weights();
        let weights = masses.iter().zip(&tau).map(|(m, t)| m / t).collect();
        Ok(Self { grid, weights })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Trapezoid mass, exact for the piecewise-linear density.
    pub fn mass(&self) -> f64 {
        self.nodal_masses().iter().sum()
    }

    /// `τ_i w_i`.
    pub fn nodal_masses(&self) -> Vec<f64> {
        self.grid.trapezoid_weights().iter().zip(&self.weights).map(|(t, w)| t * w).collect()
    }

    /// Nodes and nodal masses, the weighted-atom view used by cost functionals.
    pub fn atoms(&self) -> (Vec<f64>, Vec<f64>) {
        (self.grid.nodes(), self.nodal_masses())
    }

    /// Integral of `f` against the piecewise-linear density, exact for
    /// polynomials of degree up to eight on each cell.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let h = self.grid.spacing();
        let mut total = 0.0;
        for i in 0..self.grid.n_points() - 1 {
            let (w0, w1) = (self.weights[i], self.weights[i + 1]);
            if w0 == 0.0 && w1 == 0.0 {
                continue;
            }
            let a = self.grid.node(i);
            let b = a + h;
            let mut cell = |lo: f64, hi: f64| -> f64 {
                let c = 0.5 * (lo + hi);
                let r = 0.5 * (hi - lo);
                GL5.iter()
                    .map(|&(s, wt)| {
                        let x = c + r * s;
                        let t = (x - a) / h;
                        wt * f(x) * (w0 + (w1 - w0) * t)
                    })
                    .sum::<f64>()
                    * r
            };
            // split at the origin so that |x|^p is smooth on each piece
            total += if a < 0.0 && b > 0.0 { cell(a, 0.0) + cell(0.0, b) } else { cell(a, b) };
        }
        total
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|x| x) / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.integrate(|x| (x - m) * (x - m)) / self.mass()
    }

    pub fn moment(&self, p: f64) -> f64 {
        self.integrate(|x| x.abs().powf(p)).max(0.0)
    }

    /// Cumulative mass at every node, unnormalized.
    fn cumulative(&self) -> Vec<f64> {
        let h = self.grid.spacing();
        let mut c = vec![0.0; self.grid.n_points()];
        for i in 1..c.len() {
            c[i] = c[i - 1] + 0.5 * h * (self.weights[i - 1] + self.weights[i]);
        }
        c
    }

    /// Distribution function, normalized by the total mass.
    pub fn cdf_table(&self) -> DensityCdf {
        let cumulative = self.cumulative();
        let total = *cumulative.last().unwrap_or(&1.0);
        DensityCdf { grid: self.grid, weights: self.weights.clone(), cumulative, total }
    }

    pub fn shifted(&self, z: f64) -> Self {
        Self { grid: self.grid.shifted(z), weights: self.weights.clone() }
    }

    /// Split into the parts left and right of node `k`; the node's weight is
    /// shared equally. The two parts add up to `self` exactly.
    pub fn split_at_node(&self, k: usize) -> Result<(Self, Self)> {
        if k >= self.grid.n_points() {
            return Err(invalid("split node out of range"));
        }
        let mut left = self.weights.clone();
        let mut right = self.weights.clone();
        for i in 0..self.weights.len() {
            if i < k {
                right[i] = 0.0;
            } else if i > k {
                left[i] = 0.0;
            } else {
                left[i] *= 0.5;
                right[i] *= 0.5;
            }
        }
        Ok((Self { grid: self.grid, weights: left }, Self { grid: self.grid, weights: right }))
    }

    /// Sum of partial densities on the same grid.
    pub fn sum(parts: &[DiscreteDensity]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("no parts to sum"))?;
        let mut w = vec![0.0; first.weights.len()];
        for p in parts {
            if p.grid != first.grid {
                return Err(invalid("parts live on different grids"));
            }
            w.iter_mut().zip(&p.weights).for_each(|(a, b)| *a += b);
        }
        Self::partial(first.grid, w)
    }

    /// Inverse-CDF sampling.
    pub fn sample_with<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let table = self.cdf_table();
        (0..n).map(|_| table.quantile(rng.gen::<f64>())).collect()
    }
}

/// Distribution function of a [`DiscreteDensity`], piecewise quadratic.
#[derive(Debug, Clone)]
pub struct DensityCdf {
    grid: Grid1D,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

impl DensityCdf {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.grid.lo() {
            return 0.0;
        }
        if x >= self.grid.hi() {
            return 1.0;
        }
        let h = self.grid.spacing();
        let (i, t) = self.grid.locate(x);
        let (w0, w1) = (self.weights[i], self.weights[i + 1]);
        let partial = h * (w0 * t + 0.5 * (w1 - w0) * t * t);
        ((self.cumulative[i] + partial) / self.total).clamp(0.0, 1.0)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let target = u * self.total;
        let i = match self.cumulative.binary_search_by(|c| c.total_cmp(&target)) {
            Ok(i) => return self.grid.node(i),
            Err(i) => i.saturating_sub(1).min(self.grid.n_points() - 2),
        };
        let h = self.grid.spacing();
        let (w0, w1) = (self.weights[i], self.weights[i + 1]);
        let r = (target - self.cumulative[i]) / h;
        // solve w0 t + (w1 - w0) t^2 / 2 = r on [0, 1]
        let a = 0.5 * (w1 - w0);
        let t = if a.abs() < 1e-14 * (w0 + w1).max(1e-300) {
            if w0 > 0.0 {
                r / w0
            } else {
                0.5
            }
        } else {
            let disc = (w0 * w0 + 4.0 * a * r).max(0.0);
            // numerically stable root of a t^2 + w0 t - r = 0
            2.0 * r / (w0 + disc.sqrt())
        };
        self.grid.node(i) + h * t.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_uniform_moment() {
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        let d = DiscreteDensity::uniform(g);
        assert!((d.mass() - 1.0).abs() < 1e-12);
        assert!((d.moment(1.0) - 0.5).abs() < 1e-9);
        assert!((d.moment(2.0) - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn test_cdf_and_quantile_roundtrip() {
        let g = Grid1D::symmetric(5.0, 51).unwrap();
        let d = DiscreteDensity::gaussian(g, 0.3, 0.7).unwrap();
        let c = d.cdf_table();
        for &u in &[0.01, 0.2, 0.5, 0.77, 0.99] {
            let x = c.quantile(u);
            assert!((c.cdf(x) - u).abs() < 1e-12, "u = {u}");
        }
        assert_eq!(c.cdf(-6.0), 0.0);
        assert_eq!(c.cdf(6.0), 1.0);
    }

    #[test]
    fn test_cic_preserves_mean() {
        let g = Grid1D::symmetric(3.0, 31).unwrap();
        let cloud = EmpiricalMeasure::from_1d(vec![-0.33, 0.1, 1.77]).unwrap();
        let d = DiscreteDensity::from_points_cic(g, &cloud).unwrap();
        let (x, m) = d.atoms();
        let mean: f64 = x.iter().zip(&m).map(|(a, b)| a * b).sum();
        assert!((mean - cloud.mean()[0]).abs() < 1e-14);
        assert!((d.mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn test_split_sums_back() {
        let g = Grid1D::symmetric(3.0, 31).unwrap();
        let d = DiscreteDensity::gaussian(g, 0.0, 1.0).unwrap();
        let (a, b) = d.split_at_node(15).unwrap();
        assert!((a.mass() - 0.5).abs() < 1e-12);
        let s = DiscreteDensity::sum(&[a, b]).unwrap();
        assert_eq!(s.weights(), d.weights());
    }
}
