use crate::error::invalid;
use crate::measures::Grid1D;
use crate::model::{ModelConfig, Profile};
use crate::numerics::ImplicitDiffusion;
use crate::rng::stream_rng;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Discretization of the scalar equation `-w_t - ν w'' + H(w') = f`, `w(T) = g`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReducedOptions {
    pub spacing: f64,
    pub cfl: f64,
    /// Keep every `k`-th time level (plus both ends).
    pub keep_every: usize,
    /// Extra half-width beyond the domain of dependence of the center.
    pub margin: f64,
}

impl Default for ReducedOptions {
    fn default() -> Self {
        Self { spacing: 0.002, cfl: 0.9, keep_every: usize::MAX, margin: 1.0 }
    }
}

/// Solution of the scalar equation on a grid centered at the query point.
#[derive(Debug, Clone)]
pub struct ReducedSolution {
    pub grid: Grid1D,
    pub viscosity: f64,
    pub dt: f64,
    pub slice_steps: Vec<usize>,
    pub slices: Vec<Vec<f64>>,
}

impl ReducedSolution {
    pub fn slice_time(&self, i: usize) -> f64 {
        self.slice_steps[i] as f64 * self.dt
    }

    pub fn value(&self, slice: usize, y: f64) -> f64 {
        self.grid.interpolate(&self.slices[slice], y)
    }

    pub fn initial_value(&self, y: f64) -> f64 {
        self.value(0, y)
    }
}

fn profiles(cfg: &ModelConfig) -> Result<(Profile, Profile)> {
    let s = cfg
        .mean_structure()
        .ok_or_else(|| Error::Unsupported(format!("model '{}' does not reduce to the mean", cfg.label)))?;
    Ok((s.running, s.terminal))
}

/// Monotone scheme: explicit Godunov Hamiltonian, implicit viscosity.
pub fn solve_reduced(cfg: &ModelConfig, viscosity: f64, center: f64, opts: ReducedOptions) -> Result<ReducedSolution> {
    if !(viscosity >= 0.0 && viscosity.is_finite()) {
        return Err(invalid(format!("viscosity must be nonnegative, got {viscosity}")));
    }
    if !(opts.spacing > 0.0 && opts.cfl > 0.0 && opts.cfl <= 1.0 && opts.margin >= 0.0) {
        return Err(invalid("reduced solver needs spacing > 0, CFL in (0, 1] and margin ≥ 0"));
    }
    let (running, terminal) = profiles(cfg)?;
    let model = cfg.hamiltonian.as_ref();
    let radius = model.constants().control_radius;
    let horizon = cfg.horizon;
    let half = radius * horizon + 6.0 * (2.0 * viscosity * horizon).sqrt() + opts.margin;
    let cells = (half / opts.spacing).ceil() as usize;
    let h = half / cells as f64;
    let n = 2 * cells + 1;
    let grid = Grid1D::new(center - half, center + half, n)?;
    // the floor on the speed keeps dt ≤ h when the control radius is tiny
    let steps = (horizon * radius.max(1.0) / (opts.cfl * h)).ceil().max(1.0) as usize;
    let dt = horizon / steps as f64;
    let nodes = grid.nodes();
    let zeros = vec![0.0; n];
    let source: Vec<f64> = nodes.iter().map(|&y| dt * running.value(y)).collect();
    let diffusion = (viscosity > 0.0).then(|| ImplicitDiffusion::new(n, viscosity * dt / (h * h)));
    let mut cur: Vec<f64> = nodes.iter().map(|&y| terminal.value(y)).collect();
    let (mut pm, mut pp, mut ham) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut kept = vec![(steps, cur.clone())];
    for step in (0..steps).rev() {
        for i in 0..n {
            let back = if i > 0 { cur[i] - cur[i - 1] } else { cur[1] - cur[0] };
            let fwd = if i + 1 < n { cur[i + 1] - cur[i] } else { cur[i] - cur[i - 1] };
            pm[i] = back / h;
            pp[i] = fwd / h;
        }
        model.godunov_line(&zeros, &pm, &pp, &mut ham);
        for i in 0..n {
            cur[i] += source[i] - dt * ham[i];
        }
        if let Some(d) = &diffusion {
            d.solve(&mut cur);
        }
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence(format!("reduced solver produced a non-finite value at step {step}")));
        }
        if step == 0 || step % opts.keep_every.max(1) == 0 {
            kept.push((step, cur.clone()));
        }
    }
    kept.reverse();
    let (slice_steps, slices) = kept.into_iter().unzip();
    Ok(ReducedSolution { grid, viscosity, dt, slice_steps, slices })
}

/// `w(0, y0)` for viscosity `ν` (`ν = 1/N + a₀` gives `V^N` at states with
/// mean `y0`, `ν = 0` gives `U` at measures with mean `y0`), extrapolated from
/// spacings `h` and `h/2`.
pub fn reduced_oracle(cfg: &ModelConfig, viscosity: f64, y0: f64) -> Result<f64> {
    let coarse_opts = ReducedOptions::default();
    let fine_opts = ReducedOptions { spacing: 0.5 * coarse_opts.spacing, ..coarse_opts };
    let coarse = solve_reduced(cfg, viscosity, y0, coarse_opts)?.initial_value(y0);
    let fine = solve_reduced(cfg, viscosity, y0, fine_opts)?.initial_value(y0);
    Ok(2.0 * fine - coarse)
}

/// Largest residual of `U^N(t, x) = w(t, mean x)` in the `N`-particle
/// equation, with `w` the inviscid solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionResidual {
    pub n_particles: usize,
    pub samples: usize,
    pub max: f64,
    pub worst_time: f64,
    pub worst_mean: f64,
}

/// Samples times on the retained levels and states `x_k = y + ζ_k - ζ̄` with
/// the mean `y` uniform in `[-2, 2]` and `ζ_k` uniform in `[-1, 1]`;
/// derivatives of `w` by central differences.
pub fn projection_residual(
    cfg: &ModelConfig,
    n_particles: usize,
    samples: usize,
    seed: u64,
) -> Result<ProjectionResidual> {
    if n_particles == 0 || samples == 0 {
        return Err(invalid("projection residual needs N ≥ 1 and at least one sample"));
    }
    let (running, _) = profiles(cfg)?;
    let opts = ReducedOptions { spacing: 0.004, cfl: 0.9, keep_every: 5, margin: 3.0 };
    let sol = solve_reduced(cfg, 0.0, 0.0, opts)?;
    let model = cfg.hamiltonian.as_ref();
    let eta = 0.02;
    let mut rng = stream_rng(seed, 0);
    let levels = sol.slices.len();
    if levels < 3 {
        return Err(invalid("horizon too short for time differences"));
    }
    let mut out = ProjectionResidual { n_particles, samples, max: 0.0, worst_time: 0.0, worst_mean: 0.0 };
    for _ in 0..samples {
        let j = rng.gen_range(1..levels - 1);
        let center: f64 = rng.gen_range(-2.0..2.0);
        let zeta: Vec<f64> = (0..n_particles).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let zbar = zeta.iter().sum::<f64>() / n_particles as f64;
        let y = zeta.iter().map(|z| center + z - zbar).sum::<f64>() / n_particles as f64;
        let w_t = (sol.value(j + 1, y) - sol.value(j - 1, y)) / (sol.slice_time(j + 1) - sol.slice_time(j - 1));
        let (wp, w0, wm) = (sol.value(j, y + eta), sol.value(j, y), sol.value(j, y - eta));
        let w1 = (wp - wm) / (2.0 * eta);
        let w2 = (wp - 2.0 * w0 + wm) / (eta * eta);
        let r = -w_t - w2 / n_particles as f64 + model.eval_h(&[y], &[w1]) - running.value(y);
        if r.abs() > out.max {
            out.max = r.abs();
            out.worst_time = sol.slice_time(j);
            out.worst_mean = y;
        }
    }
    Ok(out)
}
