//! Experiment configuration: one JSON document per run. Absent fields take
//! per-subcommand defaults, which are filled in before the config is echoed.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Catalog model name.
    pub model: Option<String>,
    /// Overrides of the model's default parameters.
    pub params: BTreeMap<String, f64>,
    /// Particle counts or sample sizes.
    pub n_list: Option<Vec<usize>>,
    /// Grid points per axis.
    pub points: Option<usize>,
    /// Grids cover `[-half_width, half_width]` per axis.
    pub half_width: Option<f64>,
    pub cfl: Option<f64>,
    /// Explicit time-step count for N-particle solves, overriding `cfl`.
    pub time_steps: Option<usize>,
    pub h_list: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub dim: Option<usize>,
    pub delta_list: Option<Vec<f64>>,
    /// Samples for randomized checks.
    pub samples: Option<usize>,
    pub initial_mean: Option<f64>,
    pub initial_variance: Option<f64>,
    /// Clipping radius of the tail test function.
    pub radius: Option<f64>,
    /// Bootstrap resamples for rate intervals.
    pub bootstrap: Option<usize>,
    /// Acceptance criteria to run (1-based).
    pub criteria: Option<Vec<usize>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// `opt.get_or_insert(default)` for `Copy` fields.
pub fn fill<T: Copy>(opt: &mut Option<T>, default: T) -> T {
    *opt.get_or_insert(default)
}

pub fn fill_vec<T: Clone>(opt: &mut Option<Vec<T>>, default: &[T]) -> Vec<T> {
    opt.get_or_insert_with(|| default.to_vec()).clone()
}
