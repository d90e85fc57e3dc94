//! Probability measures on `R^d`: grid densities, point clouds and Gaussian
//! mixtures, with moments, translations, sampling and `W_1` distances.
//!
//! Randomness comes from ChaCha20 streams keyed by `(seed, stream)`; see
//! [`crate::rng`].

mod assignment;
mod density;
mod empirical;
mod grid;
mod io;
mod mixture;
mod wasserstein;

pub use assignment::{hungarian, w1_assignment_points};
pub use density::{DensityCdf, DiscreteDensity};
pub use empirical::EmpiricalMeasure;
pub use grid::Grid1D;
pub use io::{read_cloud_csv, read_density_csv, write_cloud_csv, write_density_csv};
pub use mixture::{GaussianMixture, MixtureCdf, MixtureCdfTable, MIXTURE_WINDOW};
pub use wasserstein::{w1_cdf, Cdf1d, SortedAtoms};

use crate::error::invalid;
use crate::rng::stream_rng;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Any of the supported measure representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Measure {
    Empirical(EmpiricalMeasure),
    Density(DiscreteDensity),
    Mixture(GaussianMixture),
}

impl Measure {
    pub fn dim(&self) -> usize {
        match self {
            Measure::Empirical(m) => m.dim(),
            Measure::Density(_) => 1,
            Measure::Mixture(m) => m.dim(),
        }
    }

    /// Dirac mass at `x` in one dimension.
    pub fn dirac(x: f64) -> Self {
        Measure::Empirical(EmpiricalMeasure::from_1d(vec![x]).expect("finite point"))
    }

    /// Distribution function of a one-dimensional measure.
    pub fn cdf(&self) -> Result<Box<dyn Cdf1d + Send + Sync>> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim() });
        }
        Ok(match self {
            Measure::Empirical(m) => Box::new(SortedAtoms::new(m.points().to_vec())),
            Measure::Density(d) => Box::new(d.cdf_table()),
            Measure::Mixture(m) => Box::new(m.cdf()?),
        })
    }
}

impl From<EmpiricalMeasure> for Measure {
    fn from(m: EmpiricalMeasure) -> Self {
        Measure::Empirical(m)
    }
}

impl From<DiscreteDensity> for Measure {
    fn from(m: DiscreteDensity) -> Self {
        Measure::Density(m)
    }
}

impl From<GaussianMixture> for Measure {
    fn from(m: GaussianMixture) -> Self {
        Measure::Mixture(m)
    }
}

/// Exact `W_1` between one-dimensional measures.
pub fn w1_exact_1d(mu: &Measure, nu: &Measure) -> Result<f64> {
    let a = mu.cdf()?;
    let b = nu.cdf()?;
    Ok(w1_cdf(a.as_ref(), b.as_ref()))
}

/// Exact `W_1` between equal-size clouds by optimal assignment.
pub fn w1_assignment(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: nu.dim() });
    }
    if mu.len() != nu.len() {
        return Err(invalid(format!("cloud sizes differ: {} vs {}", mu.len(), nu.len())));
    }
    w1_assignment_points(mu.dim(), mu.points(), nu.points())
}

/// `∫ |x|^p dm` for `p ≥ 1`.
pub fn moment(m: &Measure, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("moment order must be at least 1, got {p}")));
    }
    Ok(match m {
        Measure::Empirical(e) => e.moment(p),
        Measure::Density(d) => d.moment(p),
        Measure::Mixture(g) => g.moment(p),
    })
}

/// Translate a measure by `z`; the total mass is unchanged.
pub fn pushforward_shift(m: &Measure, z: &[f64]) -> Result<Measure> {
    if z.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: z.len() });
    }
    Ok(match m {
        Measure::Empirical(e) => Measure::Empirical(e.shifted(z)?),
        Measure::Density(d) => Measure::Density(d.shifted(z[0])),
        Measure::Mixture(g) => Measure::Mixture(g.shifted(z)?),
    })
}

/// `n` i.i.d. samples from a density or mixture, using stream 0 of `seed`.
pub fn sample(m: &Measure, n: usize, seed: u64) -> Result<EmpiricalMeasure> {
    sample_stream(m, n, seed, 0)
}

/// As [`sample`] with an explicit stream id.
pub fn sample_stream(m: &Measure, n: usize, seed: u64, stream: u64) -> Result<EmpiricalMeasure> {
    if n < 1 {
        return Err(invalid("sample size must be at least 1"));
    }
    let mut rng = stream_rng(seed, stream);
    match m {
        Measure::Density(d) => EmpiricalMeasure::from_1d(d.sample_with(&mut rng, n)),
        Measure::Mixture(g) => EmpiricalMeasure::new(g.dim(), g.sample_with(&mut rng, n)),
        Measure::Empirical(_) => Err(Error::Unsupported("sampling from a point cloud".into())),
    }
}
