//! Numerical laboratory for symmetric N-particle stochastic control and its
//! mean-field limit.
//!
//! * [`model`]: Hamiltonians, costs and the model catalog.
//! * [`measures`]: densities, clouds, mixtures and `W_1` distances.
//! * [`lipnet`]: finite nets of Lipschitz test functions and tail experiments.
//! * [`nparticle`]: grid solver for the `N`-particle value function, checks and Monte Carlo.
//! * [`meanfield`]: Fokker-Planck control solver and the reduced scalar equation.
//! * [`concentration`]: empirical-measure experiments.
//! * [`partition`]: grouping of particles by feedback value.
//! * [`rates`]: log-log rate fits with bootstrap intervals.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod concentration;
pub mod error;
pub mod lipnet;
pub mod meanfield;
pub mod measures;
pub mod model;
pub mod nparticle;
pub mod numerics;
pub mod partition;
pub mod rates;
pub mod rng;

pub use error::{Error, Result};
