use super::{ControlField, MFTrajectory, MfcProblem};
use crate::error::invalid;
use crate::measures::DiscreteDensity;
use crate::model::MeasureRef;
use crate::numerics::Tridiagonal;
use crate::{Error, Result};

/// Finite-volume Fokker-Planck step on nodal densities `w` with masses
/// `τ_i w_i`: explicit donor-cell advection with the flux through face
/// `i + 1/2` equal to `α_i⁺ w_i + α_{i+1}⁻ w_{i+1}`, then implicit diffusion
/// `(T + dt K) w' = mass`, where `T = diag(τ)` and `K` is the Neumann
/// stiffness matrix. The flux splitting moves the mean at exactly the
/// mass-weighted average of `α`.
#[derive(Debug, Clone)]
pub struct FpScheme {
    dt: f64,
    tau: Vec<f64>,
    nodes: Vec<f64>,
    implicit: Tridiagonal,
}

impl FpScheme {
    pub fn new(prob: &MfcProblem) -> Self {
        let g = prob.grid;
        let n = g.n_points();
        let h = g.spacing();
        let dt = prob.dt();
        let tau = g.trapezoid_weights();
        let k = dt / h;
        let lower: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { -k }).collect();
        let upper: Vec<f64> = (0..n).map(|i| if i + 1 == n { 0.0 } else { -k }).collect();
        let diag: Vec<f64> = (0..n).map(|i| tau[i] + if i == 0 || i + 1 == n { k } else { 2.0 * k }).collect();
        Self { dt, tau, nodes: g.nodes(), implicit: Tridiagonal::new(&lower, &diag, &upper) }
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn step(&self, w: &[f64], alpha: &[f64]) -> Vec<f64> {
        let n = w.len();
        let mut mass: Vec<f64> = w.iter().zip(&self.tau).map(|(w, t)| w * t).collect();
        for i in 0..n - 1 {
            let f = alpha[i].max(0.0) * w[i] + alpha[i + 1].min(0.0) * w[i + 1];
            mass[i] -= self.dt * f;
            mass[i + 1] += self.dt * f;
        }
        self.implicit.solve(&mut mass);
        // round-off can leave tiny negative values in far tails
        mass.iter_mut().for_each(|v| *v = v.max(0.0));
        mass
    }

    /// Jump of `μ` seen by the outflow of node `i`: `μ_i - μ_{i+1}` for
    /// `α_i > 0`, `μ_{i-1} - μ_i` for `α_i < 0`, their mean at `α_i = 0`;
    /// zero where the flow would cross the boundary.
    fn outflow_jump(mu: &[f64], a: f64, i: usize) -> f64 {
        let n = mu.len();
        let right = if i + 1 < n { mu[i] - mu[i + 1] } else { 0.0 };
        let left = if i > 0 { mu[i - 1] - mu[i] } else { 0.0 };
        if a > 0.0 {
            right
        } else if a < 0.0 {
            left
        } else {
            0.5 * (left + right)
        }
    }

    /// Given `λ^{n+1}`, return `μ = S^{-1} λ^{n+1}` and `(T - dt D)ᵀ μ`.
    fn adjoint(&self, lambda_next: &[f64], alpha: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut mu = lambda_next.to_vec();
        self.implicit.solve(&mut mu);
        let back = (0..mu.len())
            .map(|i| {
                let a = alpha[i];
                let out = if a == 0.0 { 0.0 } else { a * Self::outflow_jump(&mu, a, i) };
                self.tau[i] * mu[i] - self.dt * out
            })
            .collect();
        (mu, back)
    }
}

fn check_inputs(prob: &MfcProblem, alpha: &ControlField, m0: &DiscreteDensity) -> Result<()> {
    if alpha.grid() != &prob.grid || m0.grid() != &prob.grid {
        return Err(invalid("control, density and problem grids differ"));
    }
    if alpha.n_time_steps() != prob.n_time_steps {
        return Err(Error::DimensionMismatch { expected: prob.n_time_steps, found: alpha.n_time_steps() });
    }
    Ok(())
}

fn forward(scheme: &FpScheme, alpha: &ControlField, w0: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(alpha.n_time_steps() + 1);
    out.push(w0.to_vec());
    for n in 0..alpha.n_time_steps() {
        let next = scheme.step(&out[n], alpha.row(n));
        out.push(next);
    }
    out
}

/// Densities along the flow of `α` started at `m0`.
pub fn solve_fp(prob: &MfcProblem, alpha: &ControlField, m0: &DiscreteDensity) -> Result<MFTrajectory> {
    check_inputs(prob, alpha, m0)?;
    let scheme = FpScheme::new(prob);
    let densities = forward(&scheme, alpha, m0.weights())
        .into_iter()
        .map(|w| DiscreteDensity::partial(prob.grid, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(MFTrajectory { dt: prob.dt(), densities })
}

/// Running plus terminal cost, left endpoint in time and nodal masses in space.
pub fn mfc_cost(prob: &MfcProblem, alpha: &ControlField, m0: &DiscreteDensity) -> Result<f64> {
    Ok(cost_and_gradient(prob, std::slice::from_ref(alpha), std::slice::from_ref(m0), false)?.value)
}

/// Running cost of `α` over the first `steps` steps.
pub fn running_cost_until(prob: &MfcProblem, alpha: &ControlField, m0: &DiscreteDensity, steps: usize) -> Result<f64> {
    check_inputs(prob, alpha, m0)?;
    let scheme = FpScheme::new(prob);
    let traj = forward(&scheme, alpha, m0.weights());
    let nodes = &scheme.nodes;
    let mut total = 0.0;
    for n in 0..steps.min(prob.n_time_steps) {
        let masses: Vec<f64> = traj[n].iter().zip(&scheme.tau).map(|(w, t)| w * t).collect();
        total += prob.dt() * running_term(prob, nodes, &masses, alpha.row(n));
        if !prob.cfg.cost.running.is_zero() {
            total += prob.dt() * prob.cfg.cost.eval_f(&MeasureRef::weighted(1, nodes, &masses));
        }
    }
    Ok(total)
}

fn running_term(prob: &MfcProblem, nodes: &[f64], masses: &[f64], alpha: &[f64]) -> f64 {
    let model = prob.cfg.hamiltonian.as_ref();
    nodes
        .iter()
        .zip(masses)
        .zip(alpha)
        .map(|((&x, &m), &a)| if m == 0.0 { 0.0 } else { m * model.eval_l(&[x], &[a]) })
        .sum()
}

/// Cost of a population split in groups, each moved by its own control, with
/// gradients by the discrete adjoint.
#[derive(Debug, Clone)]
pub struct CostGradient {
    pub value: f64,
    /// `∂J/∂α^k` per group, laid out like the control values.
    pub gradients: Vec<Vec<f64>>,
    /// Gradients divided by `dt τ_i w_i`: approximately `D_a L(x, α) + D u`.
    pub natural: Vec<Vec<f64>>,
    /// Nodal densities per group and time.
    pub densities: Vec<Vec<Vec<f64>>>,
    /// `λ^n / τ` per group, `n = 0..=n_time_steps`.
    pub adjoint: Vec<Vec<Vec<f64>>>,
}

pub fn cost_and_gradient(
    prob: &MfcProblem,
    controls: &[ControlField],
    m0s: &[DiscreteDensity],
    with_gradient: bool,
) -> Result<CostGradient> {
    if controls.len() != m0s.len() || controls.is_empty() {
        return Err(invalid("need one control per group"));
    }
    for (a, m) in controls.iter().zip(m0s) {
        check_inputs(prob, a, m)?;
    }
    let scheme = FpScheme::new(prob);
    let (steps, dt) = (prob.n_time_steps, prob.dt());
    let n = prob.grid.n_points();
    let nodes = &scheme.nodes;
    let tau = &scheme.tau;
    let cost = &prob.cfg.cost;
    let model = prob.cfg.hamiltonian.as_ref();
    let with_running = !cost.running.is_zero();
    let densities: Vec<Vec<Vec<f64>>> =
        controls.iter().zip(m0s).map(|(a, m)| forward(&scheme, a, m.weights())).collect();
    let total_masses = |step: usize| -> Vec<f64> {
        (0..n).map(|i| tau[i] * densities.iter().map(|d| d[step][i]).sum::<f64>()).collect()
    };
    let mut value = 0.0;
    for step in 0..steps {
        for (a, d) in controls.iter().zip(&densities) {
            let masses: Vec<f64> = d[step].iter().zip(tau).map(|(w, t)| w * t).collect();
            value += dt * running_term(prob, nodes, &masses, a.row(step));
        }
        if with_running {
            let m = total_masses(step);
            value += dt * cost.eval_f(&MeasureRef::weighted(1, nodes, &m));
        }
    }
    let terminal = total_masses(steps);
    value += cost.eval_g(&MeasureRef::weighted(1, nodes, &terminal));
    if !value.is_finite() {
        return Err(Error::Divergence("non-finite mean-field cost".into()));
    }
    if !with_gradient {
        return Ok(CostGradient { value, gradients: vec![], natural: vec![], densities, adjoint: vec![] });
    }
    let flat = |masses: &[f64], terminal: bool| -> Vec<f64> {
        let m = MeasureRef::weighted(1, nodes, masses);
        nodes.iter().map(|&x| if terminal { cost.flat_dg(&m, &[x]) } else { cost.flat_df(&m, &[x]) }).collect()
    };
    let dg = flat(&terminal, true);
    let mut gradients = Vec::with_capacity(controls.len());
    let mut natural = Vec::with_capacity(controls.len());
    let mut adjoint = Vec::with_capacity(controls.len());
    let df_rows: Vec<Vec<f64>> =
        if with_running { (0..steps).map(|s| flat(&total_masses(s), false)).collect() } else { vec![] };
    for (a, d) in controls.iter().zip(&densities) {
        let mut grad = vec![0.0; n * steps];
        let mut nat = vec![0.0; n * steps];
        let mut lam: Vec<f64> = tau.iter().zip(&dg).map(|(t, g)| t * g).collect();
        let mut lams = vec![lam.iter().zip(tau).map(|(l, t)| l / t).collect::<Vec<f64>>()];
        for step in (0..steps).rev() {
            let w = &d[step];
            let alpha = a.row(step);
            let (mu, back) = scheme.adjoint(&lam, alpha);
            let row = &mut grad[step * n..(step + 1) * n];
            let mut dl = [0.0];
            for i in 0..n {
                model.grad_a_l(&[nodes[i]], &[alpha[i]], &mut dl);
                let jump = FpScheme::outflow_jump(&mu, alpha[i], i);
                row[i] = dt * w[i] * (tau[i] * dl[0] - jump);
                nat[step * n + i] = dl[0] - jump / tau[i];
            }
            lam = back;
            for i in 0..n {
                let running = model.eval_l(&[nodes[i]], &[alpha[i]]);
                let f = if with_running { df_rows[step][i] } else { 0.0 };
                lam[i] += dt * tau[i] * (running + f);
            }
            lams.push(lam.iter().zip(tau).map(|(l, t)| l / t).collect());
        }
        lams.reverse();
        gradients.push(grad);
        natural.push(nat);
        adjoint.push(lams);
    }
    Ok(CostGradient { value, gradients, natural, densities, adjoint })
}
