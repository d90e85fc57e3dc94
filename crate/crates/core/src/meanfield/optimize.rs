use super::fp::{cost_and_gradient, running_cost_until, CostGradient};
use super::{ControlField, MFTrajectory, MfcProblem};
use crate::error::invalid;
use crate::measures::DiscreteDensity;
use crate::model::MeasureRef;
use crate::nparticle::{run_backward, NParticleProblem, Retention};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MfcMethod {
    FixedPoint,
    Direct,
    /// Fixed point, then direct descent from its best iterate.
    Both,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MfcOptions {
    pub max_fixed_point_iters: usize,
    pub max_direct_iters: usize,
    /// Fixed point stops when successive values differ by less than this.
    pub fixed_point_stop: f64,
    /// Descent stops when one step lowers the value by less than this.
    pub direct_stop: f64,
    /// Accuracy claimed for the returned value.
    pub tolerance: f64,
}

impl Default for MfcOptions {
    fn default() -> Self {
        Self {
            max_fixed_point_iters: 200,
            max_direct_iters: 2000,
            fixed_point_stop: 1e-8,
            direct_stop: 1e-11,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MfcSolution {
    pub control: ControlField,
    pub trajectory: MFTrajectory,
    pub value: f64,
    /// Discrete adjoint divided by the trapezoid weights, one row per time
    /// level `0..=n_time_steps`.
    pub adjoint_u: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub fixed_point_value: Option<f64>,
    pub direct_value: Option<f64>,
}

pub fn solve_mfc(prob: &MfcProblem, m0: &DiscreteDensity, method: MfcMethod) -> Result<MfcSolution> {
    solve_mfc_with(prob, m0, method, MfcOptions::default())
}

pub fn solve_mfc_with(
    prob: &MfcProblem,
    m0: &DiscreteDensity,
    method: MfcMethod,
    opts: MfcOptions,
) -> Result<MfcSolution> {
    if m0.grid() != &prob.grid {
        return Err(invalid("initial density and problem grids differ"));
    }
    if (m0.mass() - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("initial density has mass {}", m0.mass())));
    }
    let m0s = std::slice::from_ref(m0);
    let mut iterations = 0;
    let mut converged = true;
    let mut fixed_point_value = None;
    let mut direct_value = None;
    let mut control = prob.zero_control();
    if matches!(method, MfcMethod::FixedPoint | MfcMethod::Both) {
        let (c, j, it, ok) = fixed_point(prob, m0, &opts)?;
        control = c;
        fixed_point_value = Some(j);
        iterations += it;
        converged &= ok;
    }
    if matches!(method, MfcMethod::Direct | MfcMethod::Both) {
        let (mut cs, j, it, ok) = direct_descent(prob, vec![control], m0s, &opts)?;
        control = cs.remove(0);
        direct_value = Some(j);
        iterations += it;
        converged = if method == MfcMethod::Both { ok } else { converged && ok };
    }
    let cg = cost_and_gradient(prob, std::slice::from_ref(&control), m0s, true)?;
    let densities =
        cg.densities[0].iter().map(|w| DiscreteDensity::partial(prob.grid, w.clone())).collect::<Result<Vec<_>>>()?;
    Ok(MfcSolution {
        trajectory: MFTrajectory { dt: prob.dt(), densities },
        value: cg.value,
        adjoint_u: cg.adjoint.into_iter().next().unwrap_or_default(),
        control,
        iterations,
        converged,
        fixed_point_value,
        direct_value,
    })
}

/// Alternate a backward HJB solve with source `δF/δm(m_t)` and terminal
/// `δG/δm(m_T)` and the forward transport, damping the control update with
/// weight `2/(k+2)` and restarting from the best iterate when the value rises.
fn fixed_point(prob: &MfcProblem, m0: &DiscreteDensity, opts: &MfcOptions) -> Result<(ControlField, f64, usize, bool)> {
    let m0s = std::slice::from_ref(m0);
    let model = prob.cfg.hamiltonian.as_ref();
    let cost = &prob.cfg.cost;
    let bound = prob.bound();
    let hjb = NParticleProblem::new(prob.cfg.clone(), 1, prob.grid, prob.n_time_steps)?;
    let nodes = prob.grid.nodes();
    let tau = prob.grid.trapezoid_weights();
    let n = nodes.len();
    let h = prob.grid.spacing();
    let mut alpha = prob.zero_control();
    let mut current = cost_and_gradient(prob, std::slice::from_ref(&alpha), m0s, false)?;
    let mut best = (alpha.clone(), current.value);
    let mut prev = current.value;
    for k in 0..opts.max_fixed_point_iters {
        let dens = &current.densities[0];
        let masses = |w: &[f64]| -> Vec<f64> { w.iter().zip(&tau).map(|(w, t)| w * t).collect() };
        let terminal_m = masses(&dens[prob.n_time_steps]);
        let terminal: Vec<f64> =
            nodes.iter().map(|&x| cost.flat_dg(&MeasureRef::weighted(1, &nodes, &terminal_m), &[x])).collect();
        let dt = prob.dt();
        let with_running = !cost.running.is_zero();
        let u = run_backward(
            &hjb,
            terminal,
            |step, out| {
                if with_running {
                    let m = masses(&dens[step]);
                    let mr = MeasureRef::weighted(1, &nodes, &m);
                    for (o, &x) in out.iter_mut().zip(&nodes) {
                        *o += dt * cost.flat_df(&mr, &[x]);
                    }
                }
            },
            Retention::All,
        )?;
        let weight = 2.0 / (k as f64 + 2.0);
        let mut values = alpha.values().to_vec();
        let mut g = [0.0];
        for step in 0..prob.n_time_steps {
            let us = u.slice(step);
            for i in 0..n {
                let du = if i == 0 {
                    (us[1] - us[0]) / h
                } else if i + 1 == n {
                    (us[i] - us[i - 1]) / h
                } else {
                    (us[i + 1] - us[i - 1]) / (2.0 * h)
                };
                model.grad_p_h(&[nodes[i]], &[du], &mut g);
                let target = (-g[0]).clamp(-bound, bound);
                let v = &mut values[step * n + i];
                *v = ((1.0 - weight) * *v + weight * target).clamp(-bound, bound);
            }
        }
        alpha = ControlField::from_raw(prob, values);
        current = cost_and_gradient(prob, std::slice::from_ref(&alpha), m0s, false)?;
        let j = current.value;
        if j < best.1 {
            best = (alpha.clone(), j);
        } else if j > prev {
            alpha = best.0.clone();
            current = cost_and_gradient(prob, std::slice::from_ref(&alpha), m0s, false)?;
        }
        if (j - prev).abs() < opts.fixed_point_stop {
            return Ok((best.0, best.1, k + 1, true));
        }
        prev = current.value;
    }
    Ok((best.0, best.1, opts.max_fixed_point_iters, false))
}

/// `1 / L''` at the origin, used to scale natural-gradient steps.
fn newton_scale(prob: &MfcProblem) -> f64 {
    let model = prob.cfg.hamiltonian.as_ref();
    let e = 1e-3;
    let l = |a: f64| model.eval_l(&[0.0], &[a]);
    let second = (l(e) - 2.0 * l(0.0) + l(-e)) / (e * e);
    if second > 0.0 {
        1.0 / second
    } else {
        1.0
    }
}

/// Projected natural-gradient descent with Armijo backtracking over one
/// control per group.
fn direct_descent(
    prob: &MfcProblem,
    mut controls: Vec<ControlField>,
    m0s: &[DiscreteDensity],
    opts: &MfcOptions,
) -> Result<(Vec<ControlField>, f64, usize, bool)> {
    let bound = prob.bound();
    let scale = newton_scale(prob);
    let mut cg: CostGradient = cost_and_gradient(prob, &controls, m0s, true)?;
    let mut step = 1.0;
    for it in 0..opts.max_direct_iters {
        let mut accepted = None;
        while step > 1e-12 {
            let candidate: Vec<ControlField> = controls
                .iter()
                .zip(&cg.natural)
                .map(|(c, q)| {
                    let v =
                        c.values().iter().zip(q).map(|(a, q)| (a - step * scale * q).clamp(-bound, bound)).collect();
                    ControlField::from_raw(prob, v)
                })
                .collect();
            let predicted: f64 = controls
                .iter()
                .zip(&candidate)
                .zip(&cg.gradients)
                .map(|((c, n), g)| c.values().iter().zip(n.values()).zip(g).map(|((a, b), g)| g * (a - b)).sum::<f64>())
                .sum();
            let trial = cost_and_gradient(prob, &candidate, m0s, false)?;
            if trial.value <= cg.value - 1e-4 * predicted.max(0.0) && trial.value <= cg.value {
                accepted = Some((candidate, trial.value));
                break;
            }
            step *= 0.5;
        }
        let Some((candidate, value)) = accepted else {
            return Ok((controls, cg.value, it, true));
        };
        let decrease = cg.value - value;
        controls = candidate;
        cg = cost_and_gradient(prob, &controls, m0s, true)?;
        if decrease < opts.direct_stop {
            return Ok((controls, cg.value, it + 1, true));
        }
        step = (2.0 * step).min(1.0);
    }
    Ok((controls, cg.value, opts.max_direct_iters, false))
}

/// `|U(0, m0) - [running cost on [0, t1] + U(t1, m_{t1})]|` with both values
/// from [`solve_mfc`] (method `Both`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DppReport {
    pub t1: f64,
    pub value: f64,
    pub running: f64,
    pub tail_value: f64,
    pub residual: f64,
}

pub fn dpp_check(prob: &MfcProblem, m0: &DiscreteDensity, t1: f64) -> Result<DppReport> {
    let dt = prob.dt();
    let steps = (t1 / dt).round() as usize;
    if !(t1 > 0.0 && t1 < prob.cfg.horizon) || (steps as f64 * dt - t1).abs() > 1e-9 * prob.cfg.horizon {
        return Err(invalid(format!("t1 = {t1} must be a time-grid point strictly inside (0, T)")));
    }
    let full = solve_mfc(prob, m0, MfcMethod::Both)?;
    let running = running_cost_until(prob, &full.control, m0, steps)?;
    let mid = full.trajectory.densities[steps].clone();
    let mid = DiscreteDensity::normalized(prob.grid, mid.into_weights())?;
    let tail = solve_mfc(&prob.tail_problem(steps)?, &mid, MfcMethod::Both)?;
    let residual = (full.value - (running + tail.value)).abs();
    Ok(DppReport { t1, value: full.value, running, tail_value: tail.value, residual })
}

#[derive(Debug, Clone)]
pub struct GroupSplitResult {
    pub value: f64,
    pub controls: Vec<ControlField>,
    pub iterations: usize,
    pub converged: bool,
}

/// Optimize one control per group; the cost sees the groups through their
/// own kinetic terms and through `F`, `G` of the total density.
pub fn group_split_value(prob: &MfcProblem, parts: &[DiscreteDensity]) -> Result<GroupSplitResult> {
    if parts.is_empty() {
        return Err(invalid("need at least one group"));
    }
    if parts.iter().any(|p| p.grid() != &prob.grid) {
        return Err(invalid("group densities must live on the problem grid"));
    }
    let total: f64 = parts.iter().map(DiscreteDensity::mass).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("group masses sum to {total}, expected 1")));
    }
    let start = vec![prob.zero_control(); parts.len()];
    let (controls, value, iterations, converged) = direct_descent(prob, start, parts, &MfcOptions::default())?;
    Ok(GroupSplitResult { value, controls, iterations, converged })
}
