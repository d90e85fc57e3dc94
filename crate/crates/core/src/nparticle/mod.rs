//! Dynamic programming for the symmetric `N`-particle control problem on a
//! tensor grid, feedback extraction, uniform-estimate diagnostics and Monte
//! Carlo policy evaluation.

mod checks;
mod export;
mod montecarlo;
mod solver;
mod tensor;

pub use checks::{
    lipschitz_check, semiconcavity_check, semiconcavity_check_with, LipschitzReport, SemiconcavityReport,
};
pub use export::{export_tensor, read_tensor, write_slice_csv, TensorMetadata};
pub use montecarlo::{
    optimal_feedback, policy_evaluate_mc, policy_evaluate_mc_with, FeedbackPolicy, McEstimate, TensorFeedback,
    MAX_DISCARD_RATE,
};
pub(crate) use solver::run_backward;
pub use solver::{solve_hjb, solve_hjb_with, Retention};
pub use tensor::ValueTensor;

use crate::error::invalid;
use crate::measures::Grid1D;
use crate::model::ModelConfig;
use crate::{Error, Result};

/// Largest supported `N·d`.
pub const MAX_AXES: usize = 4;

/// Largest number of nodes per time slice.
pub const NODE_LIMIT: usize = 64_000_000;

/// An `N`-particle problem on the tensor grid `axis_grid^{N·d}` with
/// `n_time_steps` uniform backward steps on `[0, T]`.
#[derive(Debug, Clone)]
pub struct NParticleProblem {
    pub cfg: ModelConfig,
    pub n_particles: usize,
    pub axis_grid: Grid1D,
    pub n_time_steps: usize,
}

impl NParticleProblem {
    pub fn new(cfg: ModelConfig, n_particles: usize, axis_grid: Grid1D, n_time_steps: usize) -> Result<Self> {
        cfg.validate()?;
        if n_particles == 0 {
            return Err(invalid("need at least one particle"));
        }
        let axes = n_particles * cfg.dim;
        if axes > MAX_AXES {
            return Err(Error::Unsupported(format!("N·d = {axes} exceeds the tensor-solver limit {MAX_AXES}")));
        }
        if n_time_steps < 2 {
            return Err(invalid("need at least two time steps"));
        }
        if axis_grid.n_points() < 3 {
            return Err(invalid("axis grid needs at least three points"));
        }
        let nodes = axis_grid.n_points().checked_pow(axes as u32).unwrap_or(usize::MAX);
        if nodes > NODE_LIMIT {
            return Err(Error::GridTooLarge { nodes, limit: NODE_LIMIT });
        }
        Ok(Self { cfg, n_particles, axis_grid, n_time_steps })
    }

    /// Smallest step count with `dt` at `cfl` times the stability limit.
    pub fn with_cfl(cfg: ModelConfig, n_particles: usize, axis_grid: Grid1D, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(invalid("CFL fraction must lie in (0, 1]"));
        }
        let probe = Self::new(cfg, n_particles, axis_grid, 2)?;
        let steps = (probe.cfg.horizon / (cfl * probe.max_stable_dt())).ceil().max(2.0) as usize;
        Self::new(probe.cfg, n_particles, axis_grid, steps)
    }

    pub fn axes(&self) -> usize {
        self.n_particles * self.cfg.dim
    }

    pub fn dt(&self) -> f64 {
        self.cfg.horizon / self.n_time_steps as f64
    }

    /// Largest stable step: `dt (N d R / h + 2 a₀ d / h²) ≤ 1`.
    pub fn max_stable_dt(&self) -> f64 {
        let h = self.axis_grid.spacing();
        let d = self.cfg.dim as f64;
        let r = self.cfg.hamiltonian.constants().control_radius;
        let rate = self.axes() as f64 * r / h + 2.0 * self.cfg.common_noise_a0 * d / (h * h);
        if rate > 0.0 {
            1.0 / rate
        } else {
            f64::INFINITY
        }
    }
}
