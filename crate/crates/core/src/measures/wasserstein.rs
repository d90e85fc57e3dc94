//! Exact one-dimensional `W_1 = ∫ |F_μ - F_ν|`.

use super::{DensityCdf, MixtureCdf, MixtureCdfTable};
use crate::numerics::{bisect, gauss_legendre};

/// A one-dimensional distribution function.
pub trait Cdf1d {
    /// Right-continuous `F(x)`.
    fn cdf(&self, x: f64) -> f64;
    /// Left limit `F(x-)`.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
    /// Interval outside of which `F` is 0 or 1 up to negligible tails.
    fn support(&self) -> (f64, f64);
    /// Points where `F` may fail to be smooth, sorted.
    fn breakpoints(&self) -> Vec<f64>;
    /// Whether `F` is a step function.
    fn is_step(&self) -> bool;
    /// Largest interval length on which `F` may be treated as one smooth piece.
    fn resolution(&self) -> f64;
}

/// Sorted atoms of a uniform one-dimensional cloud.
#[derive(Debug, Clone)]
pub struct SortedAtoms(Vec<f64>);

impl SortedAtoms {
    pub fn new(mut atoms: Vec<f64>) -> Self {
        atoms.sort_by(|a, b| a.total_cmp(b));
        Self(atoms)
    }

    pub fn from_sorted(atoms: Vec<f64>) -> Self {
        debug_assert!(atoms.windows(2).all(|w| w[0] <= w[1]));
        Self(atoms)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.0
    }
}

impl Cdf1d for SortedAtoms {
    fn cdf(&self, x: f64) -> f64 {
        self.0.partition_point(|&a| a <= x) as f64 / self.0.len() as f64
    }
    fn cdf_left(&self, x: f64) -> f64 {
        self.0.partition_point(|&a| a < x) as f64 / self.0.len() as f64
    }
    fn support(&self) -> (f64, f64) {
        (self.0[0], self.0[self.0.len() - 1])
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.clone()
    }
    fn is_step(&self) -> bool {
        true
    }
    fn resolution(&self) -> f64 {
        f64::INFINITY
    }
}

impl Cdf1d for DensityCdf {
    fn cdf(&self, x: f64) -> f64 {
        DensityCdf::cdf(self, x)
    }
    fn support(&self) -> (f64, f64) {
        (self.grid().lo(), self.grid().hi())
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.grid().nodes()
    }
    fn is_step(&self) -> bool {
        false
    }
    fn resolution(&self) -> f64 {
        self.grid().spacing()
    }
}

impl Cdf1d for MixtureCdf {
    fn cdf(&self, x: f64) -> f64 {
        MixtureCdf::cdf(self, x)
    }
    fn cdf_left(&self, x: f64) -> f64 {
        if self.std_dev() == 0.0 {
            let c = self.centers();
            c.partition_point(|&a| a < x) as f64 / c.len() as f64
        } else {
            MixtureCdf::cdf(self, x)
        }
    }
    fn support(&self) -> (f64, f64) {
        MixtureCdf::support(self)
    }
    fn breakpoints(&self) -> Vec<f64> {
        if self.std_dev() == 0.0 {
            self.centers().to_vec()
        } else {
            Vec::new()
        }
    }
    fn is_step(&self) -> bool {
        self.std_dev() == 0.0
    }
    fn resolution(&self) -> f64 {
        if self.std_dev() == 0.0 {
            f64::INFINITY
        } else {
            0.25 * self.std_dev()
        }
    }
}

impl Cdf1d for MixtureCdfTable {
    fn cdf(&self, x: f64) -> f64 {
        MixtureCdfTable::cdf(self, x)
    }
    fn support(&self) -> (f64, f64) {
        MixtureCdfTable::support(self)
    }
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    fn is_step(&self) -> bool {
        false
    }
    fn resolution(&self) -> f64 {
        0.25 * self.std_dev()
    }
}

fn w1_steps(a: &dyn Cdf1d, b: &dyn Cdf1d) -> f64 {
    let mut pts = a.breakpoints();
    pts.extend(b.breakpoints());
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    pts.windows(2).map(|w| (a.cdf(w[0]) - b.cdf(w[0])).abs() * (w[1] - w[0])).sum()
}

/// `∫ |F_a - F_b| dx` on the merged breakpoints, with smooth pieces split at
/// sign changes and integrated by Gauss-Legendre quadrature.
pub fn w1_cdf(a: &dyn Cdf1d, b: &dyn Cdf1d) -> f64 {
    if a.is_step() && b.is_step() {
        return w1_steps(a, b);
    }
    let (la, ha) = a.support();
    let (lb, hb) = b.support();
    let mut pts = a.breakpoints();
    pts.extend(b.breakpoints());
    pts.extend([la, ha, lb, hb]);
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    let res = a.resolution().min(b.resolution());
    let diff = |x: f64| a.cdf(x) - b.cdf(x);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let pieces = if res.is_finite() { ((v - u) / res).ceil().max(1.0) as usize } else { 1 };
        let step = (v - u) / pieces as f64;
        for k in 0..pieces {
            let s = u + k as f64 * step;
            let e = if k + 1 == pieces { v } else { s + step };
            let ds = a.cdf(s) - b.cdf(s);
            let de = a.cdf_left(e) - b.cdf_left(e);
            if ds * de < 0.0 {
                let tol = 1e-15 * (1.0 + s.abs().max(e.abs()));
                let r = bisect(s, e, diff, tol);
                total += gauss_legendre(s, r, diff).abs() + gauss_legendre(r, e, diff).abs();
            } else {
                total += gauss_legendre(s, e, diff).abs();
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DiscreteDensity, GaussianMixture, Grid1D};

    #[test]
    fn test_atoms() {
        let a = SortedAtoms::new(vec![0.0]);
        let b = SortedAtoms::new(vec![1.0]);
        assert_eq!(w1_cdf(&a, &b), 1.0);
        let a = SortedAtoms::new(vec![0.0, 1.0]);
        let b = SortedAtoms::new(vec![0.5, 1.5]);
        assert_eq!(w1_cdf(&a, &b), 0.5);
    }

    #[test]
    fn test_two_gaussians_shift() {
        // W1 between translates equals the shift
        let a = GaussianMixture::normal(0.0, 1.0).unwrap().cdf().unwrap();
        let b = GaussianMixture::normal(0.3, 1.0).unwrap().cdf().unwrap();
        assert!((w1_cdf(&a, &b) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn test_gaussians_different_scale() {
        // W1(N(0,1), N(0,s^2)) = |1 - s| E|Z| = |1 - s| sqrt(2/pi)
        let a = GaussianMixture::normal(0.0, 1.0).unwrap().cdf().unwrap();
        let b = GaussianMixture::normal(0.0, 2.0).unwrap().cdf().unwrap();
        let expect = (2.0 / std::f64::consts::PI).sqrt();
        assert!((w1_cdf(&a, &b) - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn test_point_vs_gaussian() {
        // W1(δ_0, N(0,1)) = E|Z|
        let a = SortedAtoms::new(vec![0.0]);
        let b = GaussianMixture::normal(0.0, 1.0).unwrap().cdf().unwrap();
        let expect = (2.0 / std::f64::consts::PI).sqrt();
        assert!((w1_cdf(&a, &b) - expect).abs() < 1e-12);
    }

    #[test]
    fn test_uniform_density_vs_atom() {
        // W1(U[0,1], δ_0) = 1/2
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        let d = DiscreteDensity::uniform(g).cdf_table();
        let a = SortedAtoms::new(vec![0.0]);
        assert!((w1_cdf(&d, &a) - 0.5).abs() < 1e-14);
        // W1(U[0,1], δ_{1/2}) = 1/4, with a sign change inside a cell
        let a = SortedAtoms::new(vec![0.5]);
        assert!((w1_cdf(&d, &a) - 0.25).abs() < 1e-14);
    }
}
