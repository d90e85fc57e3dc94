use crate::error::invalid;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Uniform grid on `[lo, hi]` with `n_points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!("grid needs lo < hi, got [{lo}, {hi}]")));
        }
        if n_points < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {n_points}")));
        }
        Ok(Self { lo, hi, n_points })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weights `τ_i`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n_points];
        w[0] = 0.5 * h;
        w[self.n_points - 1] = 0.5 * h;
        w
    }

    /// Cell index `i` and fraction `t ∈ [0, 1]` with `x = node(i) + t h`,
    /// clamped to the grid.
    #[inline]
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.spacing();
        let s = ((x - self.lo) / h).clamp(0.0, (self.n_points - 1) as f64);
        let i = (s.floor() as usize).min(self.n_points - 2);
        (i, s - i as f64)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Index of the node nearest to `x`, clamped.
    pub fn nearest(&self, x: f64) -> usize {
        let s = ((x - self.lo) / self.spacing()).round();
        (s.max(0.0) as usize).min(self.n_points - 1)
    }

    /// Same grid translated by `z`.
    pub fn shifted(&self, z: f64) -> Self {
        Self { lo: self.lo + z, hi: self.hi + z, n_points: self.n_points }
    }

    /// Linear interpolation of nodal values, constant extrapolation.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let (i, t) = self.locate(x);
        values[i] * (1.0 - t) + values[i + 1] * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_grid_basics() {
        let g = Grid1D::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.locate(0.25), (2, 0.5));
        assert_eq!(g.locate(1.0), (3, 1.0));
        assert_eq!(g.locate(-7.0), (0, 0.0));
        assert_eq!(g.trapezoid_weights().iter().sum::<f64>(), 2.0);
        assert!(Grid1D::new(1.0, 1.0, 3).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
    }
}
