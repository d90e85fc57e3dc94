use crate::error::invalid;
use crate::model::MeasureRef;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform probability measure on `N` points of `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    dim: usize,
    points: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "{} coordinates do not form a nonempty cloud in dimension {dim}",
                points.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        Ok(Self { dim, points })
    }

    pub fn from_1d(points: Vec<f64>) -> Result<Self> {
        Self::new(1, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn as_measure_ref(&self) -> MeasureRef<'_> {
        MeasureRef::uniform(self.dim, &self.points)
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut m = vec![0.0; self.dim];
        for (i, x) in self.points.iter().enumerate() {
            m[i % self.dim] += x / n;
        }
        m
    }

    /// `∫ |x|^p dm`.
    pub fn moment(&self, p: f64) -> f64 {
        let total: f64 = (0..self.len()).map(|i| self.point(i).iter().map(|x| x * x).sum::<f64>().sqrt().powf(p)).sum();
        total / self.len() as f64
    }

    pub fn shifted(&self, z: &[f64]) -> Result<Self> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        let points = self.points.iter().enumerate().map(|(i, x)| x + z[i % self.dim]).collect();
        Ok(Self { dim: self.dim, points })
    }

    /// Sorted coordinates of a one-dimensional cloud.
    pub fn sorted_1d(&self) -> Result<Vec<f64>> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim });
        }
        let mut v = self.points.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        Ok(v)
    }
}
