use super::tensor::{interpolate, ValueTensor};
use crate::error::invalid;
use crate::rng::stream_rng;
use crate::Result;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// `N max_k |D_{x^k} V^N|` over interior nodes and retained slices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub value: f64,
    pub time: f64,
    pub state: Vec<f64>,
    pub particle: usize,
}

pub fn lipschitz_check(v: &ValueTensor) -> LipschitzReport {
    let n = v.grid.n_points();
    let (np, d) = (v.n_particles, v.dim);
    let h = v.grid.spacing();
    let strides: Vec<usize> = (0..v.axes()).map(|a| v.stride(a)).collect();
    let mut best = (0.0, 0usize, 0usize, 0usize);
    for (si, slice) in v.slices.iter().enumerate() {
        for flat in 0..slice.len() {
            let interior = strides.iter().all(|&s| {
                let i = flat / s % n;
                i >= 1 && i + 1 < n
            });
            if !interior {
                continue;
            }
            for k in 0..np {
                let norm2: f64 = (0..d)
                    .map(|c| {
                        let s = strides[k * d + c];
                        let g = (slice[flat + s] - slice[flat - s]) / (2.0 * h);
                        g * g
                    })
                    .sum();
                let val = np as f64 * norm2.sqrt();
                if val > best.0 {
                    best = (val, si, flat, k);
                }
            }
        }
    }
    LipschitzReport { value: best.0, time: v.slice_time(best.1), state: v.node_state(best.2), particle: best.3 }
}

/// Largest normalized second difference of `V^N` along random directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemiconcavityReport {
    pub max_ratio: f64,
    pub samples: usize,
    pub probe_step: f64,
    pub probe_time_step: f64,
    pub worst_time: f64,
    pub worst_state: Vec<f64>,
}

/// Value at an arbitrary time, linear between retained slices.
fn value_at_time(v: &ValueTensor, t: f64, state: &[f64]) -> f64 {
    let steps = v.slice_steps.len();
    let s = t / v.dt();
    let hi = v.slice_steps.partition_point(|&k| (k as f64) < s).min(steps - 1).max(1);
    let (k0, k1) = (v.slice_steps[hi - 1] as f64, v.slice_steps[hi] as f64);
    let w = ((s - k0) / (k1 - k0)).clamp(0.0, 1.0);
    let a = interpolate(&v.grid, &v.slices[hi - 1], state);
    let b = interpolate(&v.grid, &v.slices[hi], state);
    a * (1.0 - w) + b * w
}

/// For random `(t, x)` in the central half of the box and random directions
/// `(ξ, ξ⁰)`, the second difference quotient with space step `s = 3h` and
/// time step `s₀ = min(s, T/8)`, divided by `N^{-1} Σ|ξ^i|² + (s₀ ξ⁰ / s)²`;
/// returns the maximum. Directions are uniform on the unit sphere of
/// `(ξ/√N, ξ⁰)`, so the sampled maximum approaches the supremum at the
/// same speed for every `N`.
pub fn semiconcavity_check(v: &ValueTensor, samples: usize, seed: u64) -> Result<SemiconcavityReport> {
    semiconcavity_check_with(v, samples, seed, true)
}

/// As [`semiconcavity_check`]; with `include_time = false` the directions
/// have `ξ⁰ = 0` and are uniform on the sphere of `ξ/√N`.
pub fn semiconcavity_check_with(
    v: &ValueTensor,
    samples: usize,
    seed: u64,
    include_time: bool,
) -> Result<SemiconcavityReport> {
    if samples < 100 {
        return Err(invalid(format!("semiconcavity check needs at least 100 samples, got {samples}")));
    }
    if v.n_slices() < 3 {
        return Err(invalid("semiconcavity check needs at least three retained slices"));
    }
    let grid = v.grid;
    let step = 3.0 * grid.spacing();
    let horizon = v.horizon;
    let time_step = step.min(horizon / 8.0);
    if 4.0 * step >= grid.hi() - grid.lo() {
        return Err(invalid(format!("probe step {step} too large for the box")));
    }
    let (np, axes) = (v.n_particles, v.axes());
    let center = 0.5 * (grid.lo() + grid.hi());
    let quarter = 0.25 * (grid.hi() - grid.lo());
    let mut rng = stream_rng(seed, 0);
    let mut best = SemiconcavityReport {
        max_ratio: f64::NEG_INFINITY,
        samples,
        probe_step: step,
        probe_time_step: time_step,
        worst_time: 0.0,
        worst_state: vec![],
    };
    let (mut x, mut plus, mut minus) = (vec![0.0; axes], vec![0.0; axes], vec![0.0; axes]);
    let mut xi = vec![0.0; axes];
    for _ in 0..samples {
        let t = rng.gen_range(time_step..horizon - time_step);
        x.iter_mut().for_each(|c| *c = center + rng.gen_range(-quarter..quarter));
        xi.iter_mut().for_each(|c| *c = rng.sample(StandardNormal));
        let g0: f64 = if include_time { rng.sample(StandardNormal) } else { 0.0 };
        let len = (xi.iter().map(|c| c * c).sum::<f64>() + g0 * g0).sqrt();
        let scale = (np as f64).sqrt() / len;
        xi.iter_mut().for_each(|c| *c *= scale);
        let xi0 = g0 / len;
        for a in 0..axes {
            plus[a] = x[a] + step * xi[a];
            minus[a] = x[a] - step * xi[a];
        }
        let q = (value_at_time(v, t + time_step * xi0, &plus) - 2.0 * value_at_time(v, t, &x)
            + value_at_time(v, t - time_step * xi0, &minus))
            / (step * step);
        let tilt = time_step / step * xi0;
        let norm = xi.iter().map(|c| c * c).sum::<f64>() / np as f64 + tilt * tilt;
        if norm == 0.0 {
            continue;
        }
        let ratio = q / norm;
        if ratio > best.max_ratio {
            best.max_ratio = ratio;
            best.worst_time = t;
            best.worst_state = x.clone();
        }
    }
    Ok(best)
}
