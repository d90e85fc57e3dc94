//! Mean-field control without common noise on a one-dimensional grid:
//! Fokker-Planck transport, the cost functional and its discrete adjoint,
//! two optimizers, dynamic-programming and group-splitting checks, and the
//! reduced scalar equation for costs depending on the mean.

mod fp;
mod optimize;
mod reduced;

pub use fp::{cost_and_gradient, mfc_cost, running_cost_until, solve_fp, CostGradient, FpScheme};
pub use optimize::{
    dpp_check, group_split_value, solve_mfc, solve_mfc_with, DppReport, GroupSplitResult, MfcMethod, MfcOptions,
    MfcSolution,
};
pub use reduced::{
    projection_residual, reduced_oracle, solve_reduced, ProjectionResidual, ReducedOptions, ReducedSolution,
};

use crate::error::invalid;
use crate::measures::{DiscreteDensity, Grid1D};
use crate::model::ModelConfig;
use crate::nparticle::FeedbackPolicy;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A one-dimensional mean-field problem on `grid` with `n_time_steps` steps.
#[derive(Debug, Clone)]
pub struct MfcProblem {
    pub cfg: ModelConfig,
    pub grid: Grid1D,
    pub n_time_steps: usize,
}

impl MfcProblem {
    pub fn new(cfg: ModelConfig, grid: Grid1D, n_time_steps: usize) -> Result<Self> {
        cfg.validate()?;
        if cfg.dim != 1 {
            return Err(Error::Unsupported("mean-field solvers are one-dimensional".into()));
        }
        if cfg.common_noise_a0 != 0.0 {
            return Err(Error::Unsupported("mean-field solvers do not include common noise".into()));
        }
        if n_time_steps < 1 {
            return Err(invalid("need at least one time step"));
        }
        let p = Self { cfg, grid, n_time_steps };
        let allowed = p.max_stable_dt();
        if p.dt() > allowed * (1.0 + 1e-12) {
            return Err(Error::StepRestriction { dt: p.dt(), allowed });
        }
        Ok(p)
    }

    /// Smallest even step count with `dt` at `cfl` times the advection limit
    /// (even, so that `T/2` is a time-grid point). Radii below 1 are treated
    /// as 1 so the time step never exceeds the spacing.
    pub fn with_cfl(cfg: ModelConfig, grid: Grid1D, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(invalid("CFL fraction must lie in (0, 1]"));
        }
        let r = cfg.hamiltonian.constants().control_radius.max(1.0);
        let steps = (cfg.horizon * r / (cfl * 0.5 * grid.spacing())).ceil().max(2.0) as usize;
        let steps = steps + steps % 2;
        Self::new(cfg, grid, steps)
    }

    pub fn dt(&self) -> f64 {
        self.cfg.horizon / self.n_time_steps as f64
    }

    pub fn bound(&self) -> f64 {
        self.cfg.hamiltonian.constants().control_radius
    }

    /// `dt R ≤ h / 2`: upwind advection keeps every nodal mass nonnegative.
    pub fn max_stable_dt(&self) -> f64 {
        0.5 * self.grid.spacing() / self.bound()
    }

    /// Same spatial grid and step size on the remaining horizon after `steps` steps.
    pub fn tail_problem(&self, steps: usize) -> Result<Self> {
        if steps >= self.n_time_steps {
            return Err(invalid("tail problem needs at least one remaining step"));
        }
        let rest = self.n_time_steps - steps;
        let cfg = self.cfg.clone().with_horizon(self.dt() * rest as f64);
        Self::new(cfg, self.grid, rest)
    }

    pub fn zero_control(&self) -> ControlField {
        ControlField::constant(self, 0.0).expect("zero is admissible")
    }
}

/// Feedback `α(t_n, x_i)` at the left end of each time step, nodal in space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    grid: Grid1D,
    horizon: f64,
    n_time_steps: usize,
    bound: f64,
    values: Vec<f64>,
}

impl ControlField {
    pub fn new(prob: &MfcProblem, values: Vec<f64>) -> Result<Self> {
        let n = prob.grid.n_points();
        if values.len() != n * prob.n_time_steps {
            return Err(Error::DimensionMismatch { expected: n * prob.n_time_steps, found: values.len() });
        }
        let bound = prob.bound();
        if values.iter().any(|a| !(a.abs() <= bound * (1.0 + 1e-12))) {
            return Err(invalid(format!("control values must lie in [-{bound}, {bound}]")));
        }
        Ok(Self { grid: prob.grid, horizon: prob.cfg.horizon, n_time_steps: prob.n_time_steps, bound, values })
    }

    pub fn constant(prob: &MfcProblem, a: f64) -> Result<Self> {
        Self::new(prob, vec![a; prob.grid.n_points() * prob.n_time_steps])
    }

    pub(crate) fn from_raw(prob: &MfcProblem, values: Vec<f64>) -> Self {
        Self {
            grid: prob.grid,
            horizon: prob.cfg.horizon,
            n_time_steps: prob.n_time_steps,
            bound: prob.bound(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn n_time_steps(&self) -> usize {
        self.n_time_steps
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, step: usize) -> &[f64] {
        let n = self.grid.n_points();
        &self.values[step * n..(step + 1) * n]
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_time_steps as f64
    }

    /// Control at time `t` and position `x`: the row of the step containing
    /// `t`, linear in `x`, constant outside the grid.
    pub fn at(&self, t: f64, x: f64) -> f64 {
        let step = ((t / self.dt()).floor().max(0.0) as usize).min(self.n_time_steps - 1);
        self.grid.interpolate(self.row(step), x)
    }

    /// Rows `from..` as a field on the remaining horizon.
    pub fn tail(&self, from: usize) -> Self {
        let n = self.grid.n_points();
        let rest = self.n_time_steps - from;
        Self {
            grid: self.grid,
            horizon: self.dt() * rest as f64,
            n_time_steps: rest,
            bound: self.bound,
            values: self.values[from * n..].to_vec(),
        }
    }

    /// CSV with columns `t, x, value`.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "x", "value"])?;
        for step in 0..self.n_time_steps {
            let t = step as f64 * self.dt();
            for (i, a) in self.row(step).iter().enumerate() {
                w.write_record([t.to_string(), self.grid.node(i).to_string(), a.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// The same feedback applied to every particle.
impl FeedbackPolicy for ControlField {
    fn controls(&self, _step: usize, t: f64, state: &[f64], out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(state) {
            *o = self.at(t, x);
        }
    }
}

/// Densities `m^0, …, m^{n_time_steps}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MFTrajectory {
    pub dt: f64,
    pub densities: Vec<DiscreteDensity>,
}

impl MFTrajectory {
    pub fn terminal(&self) -> &DiscreteDensity {
        self.densities.last().expect("trajectory is nonempty")
    }

    /// CSV with columns `t, x, value`.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "x", "value"])?;
        for (step, m) in self.densities.iter().enumerate() {
            let t = step as f64 * self.dt;
            for (i, v) in m.weights().iter().enumerate() {
                w.write_record([t.to_string(), m.grid().node(i).to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
