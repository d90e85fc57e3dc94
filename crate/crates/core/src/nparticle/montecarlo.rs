use super::tensor::ValueTensor;
use super::NParticleProblem;
use crate::error::invalid;
use crate::model::{HamiltonianModel, MeasureRef};
use crate::rng::{mean_and_stderr, stream_rng};
use crate::{Error, Result};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A Markov feedback for all particles at once.
pub trait FeedbackPolicy: Sync {
    /// Write the controls of all particles (row-major `N × d`) at time step
    /// `step` (time `t`) and state `state` into `out`.
    fn controls(&self, step: usize, t: f64, state: &[f64], out: &mut [f64]);
}

/// The feedback `α_k = -D_p H(x^k, N D_{x^k} V^N)` read off a solved tensor.
pub struct TensorFeedback<'a> {
    pub tensor: &'a ValueTensor,
    pub model: &'a dyn HamiltonianModel,
}

impl FeedbackPolicy for TensorFeedback<'_> {
    fn controls(&self, step: usize, _t: f64, state: &[f64], out: &mut [f64]) {
        let slice = self.tensor.slice_index_for_step(step);
        feedback_into(self.tensor, self.model, slice, state, out);
    }
}

fn feedback_into(v: &ValueTensor, model: &dyn HamiltonianModel, slice: usize, state: &[f64], out: &mut [f64]) {
    let d = v.dim();
    let np = v.n_particles() as f64;
    let mut grad = vec![0.0; state.len()];
    v.gradient(slice, state, &mut grad);
    grad.iter_mut().for_each(|g| *g *= np);
    for ((x, p), a) in state.chunks(d).zip(grad.chunks(d)).zip(out.chunks_mut(d)) {
        model.grad_p_h(x, p, a);
        a.iter_mut().for_each(|c| *c = -*c);
    }
}

/// Optimal feedback of every particle at a retained slice: central
/// differences (one-sided at the box edges), scaled by `N`, mapped through
/// `-D_p H`.
pub fn optimal_feedback(
    v: &ValueTensor,
    model: &dyn HamiltonianModel,
    slice: usize,
    state: &[f64],
) -> Result<Vec<f64>> {
    if state.len() != v.axes() {
        return Err(Error::DimensionMismatch { expected: v.axes(), found: state.len() });
    }
    let mut out = vec![0.0; state.len()];
    feedback_into(v, model, slice, state, &mut out);
    Ok(out)
}

/// Monte Carlo estimate of the cost of a feedback policy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub kept: usize,
    pub discarded: usize,
}

/// Fraction of trajectories allowed to leave the padded box.
pub const MAX_DISCARD_RATE: f64 = 0.01;

/// Cost of the tensor's own optimal feedback.
pub fn policy_evaluate_mc(
    prob: &NParticleProblem,
    v: &ValueTensor,
    x0: &[f64],
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    let policy = TensorFeedback { tensor: v, model: prob.cfg.hamiltonian.as_ref() };
    policy_evaluate_mc_with(prob, &policy, x0, trials, seed)
}

/// Euler-Maruyama simulation of the controlled particles on the problem's
/// time grid. A trajectory is discarded when a coordinate leaves the axis box
/// padded by half its width on each side.
pub fn policy_evaluate_mc_with(
    prob: &NParticleProblem,
    policy: &dyn FeedbackPolicy,
    x0: &[f64],
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    let axes = prob.axes();
    if x0.len() != axes {
        return Err(Error::DimensionMismatch { expected: axes, found: x0.len() });
    }
    if trials < 1000 {
        return Err(invalid(format!("Monte Carlo evaluation needs at least 1000 trials, got {trials}")));
    }
    let g = prob.axis_grid;
    if x0.iter().any(|&x| !g.contains(x)) {
        return Err(invalid("initial state outside the grid"));
    }
    let pad = 0.5 * (g.hi() - g.lo());
    let (lo, hi) = (g.lo() - pad, g.hi() + pad);
    let (d, np) = (prob.cfg.dim, prob.n_particles);
    let (steps, dt) = (prob.n_time_steps, prob.dt());
    let model = prob.cfg.hamiltonian.as_ref();
    let cost = &prob.cfg.cost;
    let with_running = !cost.running.is_zero();
    let idio = (2.0 * dt).sqrt();
    let common = (2.0 * prob.cfg.common_noise_a0 * dt).sqrt();
    let outcomes: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(seed, trial as u64);
            let mut x = x0.to_vec();
            let mut a = vec![0.0; axes];
            let mut z0 = vec![0.0; d];
            let mut total = 0.0;
            for step in 0..steps {
                policy.controls(step, step as f64 * dt, &x, &mut a);
                let kinetic: f64 = x.chunks(d).zip(a.chunks(d)).map(|(xk, ak)| model.eval_l(xk, ak)).sum();
                total += dt * kinetic / np as f64;
                if with_running {
                    total += dt * cost.eval_f(&MeasureRef::uniform(d, &x));
                }
                z0.iter_mut().for_each(|z| *z = StandardNormal.sample(&mut rng));
                for (i, xi) in x.iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *xi += a[i] * dt + idio * z + common * z0[i % d];
                }
                if x.iter().any(|&c| !(c > lo && c < hi)) {
                    return None;
                }
            }
            Some(total + cost.eval_g(&MeasureRef::uniform(d, &x)))
        })
        .collect();
    let kept: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let discarded = trials - kept.len();
    if discarded as f64 > MAX_DISCARD_RATE * trials as f64 {
        return Err(Error::DomainExit { discarded, total: trials });
    }
    let (mean, stderr) = mean_and_stderr(&kept);
    Ok(McEstimate { mean, stderr, kept: kept.len(), discarded })
}
