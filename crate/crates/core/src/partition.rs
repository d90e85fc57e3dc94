//! Grouping particles by their feedback values on a grid covering of the
//! control ball, and the Hamiltonian residual of the grouped controls.

use crate::error::invalid;
use crate::model::HamiltonianModel;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Particles grouped by the grid cell containing their feedback value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPartition {
    pub delta: f64,
    pub radius: f64,
    pub dim: usize,
    /// Cell centers, one per nonempty cell, `dim` coordinates each.
    pub representatives: Vec<Vec<f64>>,
    /// Zero-based particle indices per nonempty cell.
    pub cells: Vec<Vec<usize>>,
}

impl ControlPartition {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Cell side `2δ/√d`, so that each cell lies in the `δ`-ball around its center.
    pub fn cell_side(&self) -> f64 {
        cell_side(self.delta, self.dim)
    }

    /// Cell index (into `cells`) of each particle.
    pub fn assignment(&self) -> Vec<usize> {
        let n = self.cells.iter().map(Vec::len).sum();
        let mut out = vec![0; n];
        for (j, cell) in self.cells.iter().enumerate() {
            for &k in cell {
                out[k] = j;
            }
        }
        out
    }
}

fn cell_side(delta: f64, dim: usize) -> f64 {
    2.0 * delta / (dim as f64).sqrt()
}

/// Cells per axis of the covering of `[-R, R]^d`.
pub fn cells_per_axis(radius: f64, delta: f64, dim: usize) -> usize {
    ((2.0 * radius / cell_side(delta, dim)) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// `(2R√d)^d`: for `δ ≤ R√d` the number of nonempty cells satisfies
/// `J δ^d ≤ (2R√d)^d`.
pub fn covering_constant(radius: f64, dim: usize) -> f64 {
    (2.0 * radius * (dim as f64).sqrt()).powi(dim as i32)
}

/// Partition the `N` feedback values (row-major `N × dim`) by half-open grid
/// cells `[-R + i s, -R + (i+1) s)` per axis, the last cell closed at `R`.
pub fn build_partition(feedback: &[f64], dim: usize, radius: f64, delta: f64) -> Result<ControlPartition> {
    if dim == 0 || !feedback.len().is_multiple_of(dim) {
        return Err(invalid("feedback array length must be a multiple of the dimension"));
    }
    if !(delta > 0.0 && radius > 0.0) {
        return Err(invalid("partition needs δ > 0 and R > 0"));
    }
    let side = cell_side(delta, dim);
    let per_axis = cells_per_axis(radius, delta, dim);
    let mut cells: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (k, a) in feedback.chunks(dim).enumerate() {
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm <= radius * (1.0 + 1e-12)) {
            return Err(invalid(format!("feedback of particle {k} has norm {norm} > R = {radius}")));
        }
        let key: Vec<usize> =
            a.iter().map(|&v| (((v + radius) / side).floor().max(0.0) as usize).min(per_axis - 1)).collect();
        cells.entry(key).or_default().push(k);
    }
    let (representatives, cells) = cells
        .into_iter()
        .map(|(key, members)| {
            let center = key.iter().map(|&i| -radius + (i as f64 + 0.5) * side).collect();
            (center, members)
        })
        .unzip();
    Ok(ControlPartition { delta, radius, dim, representatives, cells })
}

/// Per-particle values of `|H(x, p) + ᾱ·p + L(x, ᾱ)|` with `ᾱ` the particle's
/// cell representative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    pub per_particle: Vec<f64>,
}

/// `states` and `gradients` are row-major `N × dim`; `gradients` holds the
/// scaled gradients `N D_{x^k} V^N`.
pub fn residual_check(
    partition: &ControlPartition,
    states: &[f64],
    gradients: &[f64],
    model: &dyn HamiltonianModel,
) -> Result<ResidualReport> {
    let d = partition.dim;
    let n: usize = partition.cells.iter().map(Vec::len).sum();
    if states.len() != n * d || gradients.len() != n * d {
        return Err(Error::DimensionMismatch { expected: n * d, found: states.len().min(gradients.len()) });
    }
    let cell_of = partition.assignment();
    let per_particle: Vec<f64> = (0..n)
        .map(|k| {
            let x = &states[k * d..(k + 1) * d];
            let p = &gradients[k * d..(k + 1) * d];
            let a = &partition.representatives[cell_of[k]];
            let dot: f64 = a.iter().zip(p).map(|(a, p)| a * p).sum();
            (model.eval_h(x, p) + dot + model.eval_l(x, a)).abs()
        })
        .collect();
    let max = per_particle.iter().copied().fold(0.0, f64::max);
    Ok(ResidualReport { max, per_particle })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_interval_example() {
        let p = build_partition(&[-0.9, -0.1, 0.8], 1, 1.0, 0.5).unwrap();
        assert_eq!(p.cells, vec![vec![0, 1], vec![2]]);
        assert_eq!(p.representatives, vec![vec![-0.5], vec![0.5]]);
    }

    #[test]
    fn test_large_delta_single_cell() {
        let p = build_partition(&[-1.0, 0.3, 1.0, 0.0], 2, 1.5, 1.5 * 2f64.sqrt()).unwrap();
        assert_eq!(p.n_cells(), 1);
    }

    #[test]
    fn test_outside_ball_rejected() {
        assert!(build_partition(&[1.2], 1, 1.0, 0.1).is_err());
    }
}
