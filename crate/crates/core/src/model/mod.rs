//! Problem data: Hamiltonian/Lagrangian pairs, measure-dependent costs and
//! the model catalog, plus a sampling-based checker for the standing
//! structural assumptions.

mod catalog;
mod check;
mod cost;
mod hamiltonian;
mod legendre;

pub use catalog::{builtin_model, catalog_names, ModelParams};
pub use check::{check_assumptions, AssumptionCheck, AssumptionReport};
pub use cost::{MeanFieldCost, MeasureFunctional, MeasureRef, MomentFunctional, Profile};
pub use hamiltonian::{godunov_generic, GrowthConstants, HamiltonianModel, QuadraticHamiltonian};
pub use legendre::{legendre_sup, legendre_transform};

use std::fmt;
use std::sync::Arc;

/// A complete problem instance.
#[derive(Clone)]
pub struct ModelConfig {
    pub label: String,
    pub dim: usize,
    pub horizon: f64,
    pub common_noise_a0: f64,
    pub hamiltonian: Arc<dyn HamiltonianModel>,
    pub cost: MeanFieldCost,
}

impl fmt::Debug for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelConfig")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("horizon", &self.horizon)
            .field("common_noise_a0", &self.common_noise_a0)
            .field("constants", &self.hamiltonian.constants())
            .finish()
    }
}

/// Scalar data of a model whose costs depend on the measure only through its
/// mean and whose Hamiltonian does not depend on the state.
#[derive(Debug, Clone, Copy)]
pub struct MeanStructure {
    pub running: Profile,
    pub terminal: Profile,
}

impl ModelConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(crate::error::invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.common_noise_a0 >= 0.0 && self.common_noise_a0.is_finite()) {
            return Err(crate::error::invalid(format!(
                "common-noise level must be nonnegative, got {}",
                self.common_noise_a0
            )));
        }
        if self.dim == 0 || self.hamiltonian.dim() != self.dim {
            return Err(crate::Error::DimensionMismatch { expected: self.dim, found: self.hamiltonian.dim() });
        }
        Ok(())
    }

    /// Returns the scalar profiles when the model reduces to one dimension in
    /// the mean (state-independent H, costs functions of the first moment).
    pub fn mean_structure(&self) -> Option<MeanStructure> {
        if self.dim != 1 || !self.hamiltonian.is_state_independent() {
            return None;
        }
        Some(MeanStructure { running: self.cost.running.mean_profile()?, terminal: self.cost.terminal.mean_profile()? })
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_common_noise(mut self, a0: f64) -> Self {
        self.common_noise_a0 = a0;
        self
    }
}
