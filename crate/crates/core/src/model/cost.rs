use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::sync::Arc;

/// Borrowed view of a finite weighted point set in `R^d`.
///
/// Empirical measures use uniform weights; grid densities pass their nodal
/// masses.
#[derive(Debug, Clone, Copy)]
pub struct MeasureRef<'a> {
    pub dim: usize,
    pub points: &'a [f64],
    /// `None` means uniform weights `1/n`.
    pub weights: Option<&'a [f64]>,
}

impl<'a> MeasureRef<'a> {
    pub fn uniform(dim: usize, points: &'a [f64]) -> Self {
        Self { dim, points, weights: None }
    }

    pub fn weighted(dim: usize, points: &'a [f64], weights: &'a [f64]) -> Self {
        Self { dim, points, weights: Some(weights) }
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &'a [f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        match self.weights {
            Some(w) => w[i],
            None => 1.0 / self.len() as f64,
        }
    }

    /// `∫ f dm`.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * f(self.point(i))).sum()
    }

    /// Mean of the first coordinate.
    pub fn first_moment(&self) -> f64 {
        self.integrate(|x| x[0])
    }
}

/// A scalar function `g` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    /// `scale * atan(y)`
    Arctan {
        scale: f64,
    },
    /// `scale * exp(-y^2)`
    Bump {
        scale: f64,
    },
}

impl Profile {
    pub fn value(&self, y: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Arctan { scale } => scale * y.atan(),
            Profile::Bump { scale } => scale * (-y * y).exp(),
        }
    }

    pub fn d1(&self, y: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Arctan { scale } => scale / (1.0 + y * y),
            Profile::Bump { scale } => -2.0 * y * scale * (-y * y).exp(),
        }
    }

    pub fn d2(&self, y: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Arctan { scale } => -2.0 * scale * y / ((1.0 + y * y) * (1.0 + y * y)),
            Profile::Bump { scale } => scale * (4.0 * y * y - 2.0) * (-y * y).exp(),
        }
    }

    /// `sup |g|`.
    pub fn sup(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Arctan { scale } => scale.abs() * std::f64::consts::FRAC_PI_2,
            Profile::Bump { scale } => scale.abs(),
        }
    }

    /// `sup |g'|`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Arctan { scale } => scale.abs(),
            Profile::Bump { scale } => scale.abs() * (2.0f64).sqrt() * (-0.5f64).exp(),
        }
    }

    /// `sup |g''|`.
    pub fn curvature(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            // attained at y = 1/sqrt(3)
            Profile::Arctan { scale } => scale.abs() * 3.0 * 3f64.sqrt() / 8.0,
            Profile::Bump { scale } => 2.0 * scale.abs(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Profile::Zero => true,
            Profile::Arctan { scale } | Profile::Bump { scale } => scale == 0.0,
        }
    }
}

/// A functional of probability measures with its flat and intrinsic derivatives.
pub trait MeasureFunctional: Send + Sync + Debug {
    fn value(&self, m: &MeasureRef<'_>) -> f64;
    /// Flat derivative, normalized so that it integrates to zero against `m`.
    fn flat_derivative(&self, m: &MeasureRef<'_>, x: &[f64]) -> f64;
    /// Intrinsic derivative `D_m = D_x (flat derivative)`.
    fn intrinsic_derivative(&self, m: &MeasureRef<'_>, x: &[f64], out: &mut [f64]);
    /// Declared bound on `|value|`.
    fn bound(&self) -> f64;
    /// Declared bound on `|D_m|`, which is also a Lipschitz constant in `d_1`.
    fn lipschitz(&self) -> f64;
    fn is_zero(&self) -> bool;
    /// The scalar profile when the functional is `g(∫x dm)` in one dimension.
    fn mean_profile(&self) -> Option<Profile> {
        None
    }
}

/// `m ↦ g(∫ x_1 dm)`, a function of the mean of the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentFunctional {
    pub profile: Profile,
}

impl MomentFunctional {
    pub fn new(profile: Profile) -> Self {
        Self { profile }
    }
}

impl MeasureFunctional for MomentFunctional {
    fn value(&self, m: &MeasureRef<'_>) -> f64 {
        if self.profile.is_zero() {
            return 0.0;
        }
        self.profile.value(m.first_moment())
    }

    fn flat_derivative(&self, m: &MeasureRef<'_>, x: &[f64]) -> f64 {
        if self.profile.is_zero() {
            return 0.0;
        }
        let s = m.first_moment();
        self.profile.d1(s) * (x[0] - s)
    }

    fn intrinsic_derivative(&self, m: &MeasureRef<'_>, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        if !self.profile.is_zero() {
            out[0] = self.profile.d1(m.first_moment());
        }
    }

    fn bound(&self) -> f64 {
        self.profile.sup()
    }

    fn lipschitz(&self) -> f64 {
        self.profile.lipschitz()
    }

    fn is_zero(&self) -> bool {
        self.profile.is_zero()
    }

    fn mean_profile(&self) -> Option<Profile> {
        Some(self.profile)
    }
}

/// Running cost `F` and terminal cost `G`.
#[derive(Debug, Clone)]
pub struct MeanFieldCost {
    pub running: Arc<dyn MeasureFunctional>,
    pub terminal: Arc<dyn MeasureFunctional>,
}

impl MeanFieldCost {
    pub fn of_mean(running: Profile, terminal: Profile) -> Self {
        Self { running: Arc::new(MomentFunctional::new(running)), terminal: Arc::new(MomentFunctional::new(terminal)) }
    }

    pub fn eval_f(&self, m: &MeasureRef<'_>) -> f64 {
        self.running.value(m)
    }

    pub fn eval_g(&self, m: &MeasureRef<'_>) -> f64 {
        self.terminal.value(m)
    }

    pub fn flat_df(&self, m: &MeasureRef<'_>, x: &[f64]) -> f64 {
        self.running.flat_derivative(m, x)
    }

    pub fn flat_dg(&self, m: &MeasureRef<'_>, x: &[f64]) -> f64 {
        self.terminal.flat_derivative(m, x)
    }

    pub fn grad_m_f(&self, m: &MeasureRef<'_>, x: &[f64], out: &mut [f64]) {
        self.running.intrinsic_derivative(m, x, out)
    }

    pub fn grad_m_g(&self, m: &MeasureRef<'_>, x: &[f64], out: &mut [f64]) {
        self.terminal.intrinsic_derivative(m, x, out)
    }
}
