use super::tensor::ValueTensor;
use super::NParticleProblem;
use crate::model::{HamiltonianModel, MeasureRef};
use crate::numerics::ImplicitDiffusion;
use crate::{Error, Result};
use rayon::prelude::*;

/// Which time slices [`solve_hjb_with`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retention {
    All,
    /// Every `k`-th step, plus the initial and terminal steps.
    Every(usize),
    /// Only the initial and terminal slices.
    Endpoints,
}

impl Retention {
    fn keeps(self, step: usize, last: usize) -> bool {
        match self {
            Retention::All => true,
            Retention::Every(k) => step == 0 || step == last || step.is_multiple_of(k.max(1)),
            Retention::Endpoints => step == 0 || step == last,
        }
    }
}

pub fn solve_hjb(prob: &NParticleProblem) -> Result<ValueTensor> {
    solve_hjb_with(prob, Retention::All)
}

/// Backward scheme: explicit monotone Hamiltonian (Godunov for `d = 1`,
/// Lax-Friedrichs otherwise) and explicit common-noise term, then implicit
/// idiosyncratic diffusion split by axis.
pub fn solve_hjb_with(prob: &NParticleProblem, retention: Retention) -> Result<ValueTensor> {
    let dt = prob.dt();
    let allowed = prob.max_stable_dt();
    if dt > allowed * (1.0 + 1e-12) {
        return Err(Error::StepRestriction { dt, allowed });
    }
    let layout = Layout::new(prob);
    let terminal = layout.node_values(|pts| prob.cfg.cost.eval_g(&MeasureRef::uniform(prob.cfg.dim, pts)));
    let running = if prob.cfg.cost.running.is_zero() {
        None
    } else {
        Some(layout.node_values(|pts| prob.cfg.cost.eval_f(&MeasureRef::uniform(prob.cfg.dim, pts))))
    };
    run_backward(
        prob,
        terminal,
        |_, out| {
            if let Some(f) = &running {
                out.iter_mut().zip(f).for_each(|(o, f)| *o += dt * f);
            }
        },
        retention,
    )
}

/// Shared backward engine; `source(step, out)` adds `dt` times the running
/// source at step `step` to `out`.
pub(crate) fn run_backward<S>(
    prob: &NParticleProblem,
    terminal: Vec<f64>,
    mut source: S,
    retention: Retention,
) -> Result<ValueTensor>
where
    S: FnMut(usize, &mut [f64]),
{
    let layout = Layout::new(prob);
    let steps = prob.n_time_steps;
    let dt = prob.dt();
    let h = prob.axis_grid.spacing();
    let diffusion = ImplicitDiffusion::new(layout.n, dt / (h * h));
    let mut cur = terminal;
    let mut ham = vec![0.0; cur.len()];
    let mut kept: Vec<(usize, Vec<f64>)> = Vec::new();
    if retention.keeps(steps, steps) {
        kept.push((steps, cur.clone()));
    }
    for step in (0..steps).rev() {
        layout.hamiltonian(prob.cfg.hamiltonian.as_ref(), &cur, &mut ham);
        let mut next: Vec<f64> = cur.iter().zip(&ham).map(|(v, hv)| v - dt * hv).collect();
        if prob.cfg.common_noise_a0 > 0.0 {
            layout.add_common_noise(&cur, dt * prob.cfg.common_noise_a0 / (h * h), &mut next);
        }
        source(step, &mut next);
        for axis in 0..layout.axes {
            layout.implicit_axis(&diffusion, axis, &mut next);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence(format!("non-finite value at time step {step}")));
        }
        cur = next;
        if retention.keeps(step, steps) {
            kept.push((step, cur.clone()));
        }
    }
    kept.reverse();
    let (slice_steps, slices) = kept.into_iter().unzip();
    Ok(ValueTensor {
        n_particles: prob.n_particles,
        dim: prob.cfg.dim,
        grid: prob.axis_grid,
        horizon: prob.cfg.horizon,
        n_time_steps: steps,
        slice_steps,
        slices,
    })
}

pub(crate) struct Layout {
    pub n: usize,
    pub axes: usize,
    pub n_particles: usize,
    pub dim: usize,
    pub total: usize,
    pub nodes: Vec<f64>,
    pub h: f64,
    pub theta: f64,
}

impl Layout {
    pub fn new(prob: &NParticleProblem) -> Self {
        let n = prob.axis_grid.n_points();
        let axes = prob.axes();
        Self {
            n,
            axes,
            n_particles: prob.n_particles,
            dim: prob.cfg.dim,
            total: n.pow(axes as u32),
            nodes: prob.axis_grid.nodes(),
            h: prob.axis_grid.spacing(),
            theta: prob.cfg.hamiltonian.constants().control_radius,
        }
    }

    fn stride(&self, axis: usize) -> usize {
        self.n.pow(axis as u32)
    }

    /// Evaluate `f(particle positions)` at every node.
    pub fn node_values<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> Vec<f64> {
        (0..self.total)
            .into_par_iter()
            .map_init(
                || vec![0.0; self.axes],
                |pts, mut flat| {
                    for p in pts.iter_mut() {
                        *p = self.nodes[flat % self.n];
                        flat /= self.n;
                    }
                    f(pts)
                },
            )
            .collect()
    }

    /// `out = N^{-1} Σ_k Ĥ(x^k, N D^-_{x^k} V, N D^+_{x^k} V)`.
    pub fn hamiltonian(&self, model: &dyn HamiltonianModel, v: &[f64], out: &mut [f64]) {
        if self.dim == 1 {
            out.iter_mut().for_each(|o| *o = 0.0);
            for axis in 0..self.axes {
                self.godunov_axis(model, axis, v, out);
            }
        } else {
            self.lax_friedrichs(model, v, out);
        }
    }

    fn godunov_axis(&self, model: &dyn HamiltonianModel, axis: usize, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        let np = self.n_particles as f64;
        let scale = np / self.h;
        let s = self.stride(axis);
        if s == 1 {
            out.par_chunks_mut(n).zip(v.par_chunks(n)).for_each_init(
                || (vec![0.0; n], vec![0.0; n], vec![0.0; n]),
                |(pm, pp, res), (o, line)| {
                    for i in 0..n {
                        let back = if i > 0 { line[i] - line[i - 1] } else { line[1] - line[0] };
                        let fwd = if i + 1 < n { line[i + 1] - line[i] } else { line[i] - line[i - 1] };
                        pm[i] = scale * back;
                        pp[i] = scale * fwd;
                    }
                    model.godunov_line(&self.nodes, pm, pp, res);
                    o.iter_mut().zip(res.iter()).for_each(|(o, r)| *o += r / np);
                },
            );
            return;
        }
        out.par_chunks_mut(n * s).zip(v.par_chunks(n * s)).for_each_init(
            || (vec![0.0; s], vec![0.0; s], vec![0.0; s], vec![0.0; s]),
            |(x, pm, pp, res), (o, block)| {
                for i in 0..n {
                    let row = &block[i * s..(i + 1) * s];
                    let below = &block[i.saturating_sub(1) * s..(i.saturating_sub(1) + 1) * s];
                    let j_up = (i + 1).min(n - 1);
                    let above = &block[j_up * s..(j_up + 1) * s];
                    for j in 0..s {
                        // one-sided at the box edges: both differences equal
                        let (back, fwd) = if i == 0 {
                            (above[j] - row[j], above[j] - row[j])
                        } else if i == n - 1 {
                            (row[j] - below[j], row[j] - below[j])
                        } else {
                            (row[j] - below[j], above[j] - row[j])
                        };
                        pm[j] = scale * back;
                        pp[j] = scale * fwd;
                    }
                    x.iter_mut().for_each(|v| *v = self.nodes[i]);
                    model.godunov_line(x, pm, pp, res);
                    o[i * s..(i + 1) * s].iter_mut().zip(res.iter()).for_each(|(o, r)| *o += r / np);
                }
            },
        );
    }

    fn lax_friedrichs(&self, model: &dyn HamiltonianModel, v: &[f64], out: &mut [f64]) {
        let (n, d, np) = (self.n, self.dim, self.n_particles);
        let scale = np as f64 / self.h;
        let strides: Vec<usize> = (0..self.axes).map(|a| self.stride(a)).collect();
        out.par_iter_mut().enumerate().for_each_init(
            || (vec![0.0; d], vec![0.0; d], vec![0usize; self.axes]),
            |(x, p, idx), (flat, o)| {
                let mut rest = flat;
                for i in idx.iter_mut() {
                    *i = rest % n;
                    rest /= n;
                }
                let mut acc = 0.0;
                for k in 0..np {
                    let mut dissipation = 0.0;
                    for c in 0..d {
                        let a = k * d + c;
                        let i = idx[a];
                        x[c] = self.nodes[i];
                        let s = strides[a];
                        let (back, fwd) = if i == 0 {
                            let g = v[flat + s] - v[flat];
                            (g, g)
                        } else if i == n - 1 {
                            let g = v[flat] - v[flat - s];
                            (g, g)
                        } else {
                            (v[flat] - v[flat - s], v[flat + s] - v[flat])
                        };
                        p[c] = 0.5 * scale * (back + fwd);
                        dissipation += 0.5 * self.theta * scale * (fwd - back);
                    }
                    acc += model.eval_h(x, p) - dissipation;
                }
                *o = acc / np as f64;
            },
        );
    }

    /// `out += coeff · Σ_c (V(x + h e_c) - 2V(x) + V(x - h e_c))` where `e_c`
    /// moves coordinate `c` of every particle by one node; skipped where the
    /// stencil leaves the box.
    pub fn add_common_noise(&self, v: &[f64], coeff: f64, out: &mut [f64]) {
        let (n, d, np) = (self.n, self.dim, self.n_particles);
        let strides: Vec<usize> = (0..self.axes).map(|a| self.stride(a)).collect();
        let offsets: Vec<usize> = (0..d).map(|c| (0..np).map(|k| strides[k * d + c]).sum()).collect();
        out.par_iter_mut().enumerate().for_each(|(flat, o)| {
            for c in 0..d {
                let inside = (0..np).all(|k| {
                    let i = flat / strides[k * d + c] % n;
                    i >= 1 && i + 1 < n
                });
                if inside {
                    let off = offsets[c];
                    *o += coeff * (v[flat + off] - 2.0 * v[flat] + v[flat - off]);
                }
            }
        });
    }

    pub fn implicit_axis(&self, diffusion: &ImplicitDiffusion, axis: usize, v: &mut [f64]) {
        let n = self.n;
        let s = self.stride(axis);
        if s == 1 {
            v.par_chunks_mut(n).for_each(|line| diffusion.solve(line));
        } else {
            v.par_chunks_mut(n * s).for_each(|block| diffusion.solve_interleaved(block, s));
        }
    }
}
