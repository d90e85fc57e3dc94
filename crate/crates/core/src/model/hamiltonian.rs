use serde::{Deserialize, Serialize};
use std::fmt::Debug;

/// Constants declared by a model author and verified by sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    /// `c` in `-C + c|p|^2 <= H <= C + |p|^2 / c`.
    pub growth_c: f64,
    /// `C` in the growth bounds and in `|D_x H| <= C (|p| + 1)`.
    pub growth_big_c: f64,
    /// Bound on `|D_p H|` over the gradients reached by the value functions.
    pub control_radius: f64,
    /// Lower bound on the second difference of `H` in `p` for `|p| <= control_radius`.
    pub convexity_c: f64,
    /// Bound on second derivatives of `H` for `|p| <= control_radius`.
    pub hessian_bound: f64,
}

/// A Hamiltonian together with its Lagrangian.
pub trait HamiltonianModel: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn eval_h(&self, x: &[f64], p: &[f64]) -> f64;
    fn grad_p_h(&self, x: &[f64], p: &[f64], out: &mut [f64]);
    fn grad_x_h(&self, x: &[f64], p: &[f64], out: &mut [f64]);
    fn eval_l(&self, x: &[f64], a: &[f64]) -> f64;
    fn grad_a_l(&self, x: &[f64], a: &[f64], out: &mut [f64]);
    fn constants(&self) -> GrowthConstants;

    /// True when `H` does not depend on `x`.
    fn is_state_independent(&self) -> bool {
        false
    }

    /// Monotone upwind Hamiltonian for `d = 1`, evaluated on a batch of nodes:
    /// `out[i] = sup_a [ -a⁺ pp[i] - a⁻ pm[i] - L(x[i], a) ]` where `a⁺ = max(a,0)`
    /// and `a⁻ = min(a,0)`.
    fn godunov_line(&self, x: &[f64], pm: &[f64], pp: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = godunov_generic(self, x[i], pm[i], pp[i]);
        }
    }
}

/// Godunov flux for a one-dimensional convex Hamiltonian using only `H`,
/// `D_p H` and `L(x, 0)`.
pub fn godunov_generic<H: HamiltonianModel + ?Sized>(h: &H, x: f64, pm: f64, pp: f64) -> f64 {
    let xs = [x];
    let mut g = [0.0];
    let floor = -h.eval_l(&xs, &[0.0]);
    h.grad_p_h(&xs, &[pp], &mut g);
    let forward = if -g[0] >= 0.0 { h.eval_h(&xs, &[pp]) } else { floor };
    h.grad_p_h(&xs, &[pm], &mut g);
    let backward = if -g[0] <= 0.0 { h.eval_h(&xs, &[pm]) } else { floor };
    forward.max(backward)
}

/// `H(x, p) = |p|^2 + V(x)·p` with `V(x)_i = b sin(x_i)`, so that
/// `L(x, a) = |a + V(x)|^2 / 4`. With `b = 0` this is the pure quadratic model.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    dim: usize,
    drift_amplitude: f64,
    constants: GrowthConstants,
}

impl QuadraticHamiltonian {
    /// `gradient_bound` bounds `|p|` over the gradients the solvers will meet.
    pub fn new(dim: usize, drift_amplitude: f64, gradient_bound: f64) -> Self {
        let b = drift_amplitude.abs();
        let v_max = b * (dim as f64).sqrt();
        let big_c = (0.5 * v_max * v_max).max(b).max(1.0);
        let control_radius = 2.0 * gradient_bound + v_max;
        let constants = GrowthConstants {
            growth_c: 0.5,
            growth_big_c: big_c,
            control_radius,
            convexity_c: 1.0,
            hessian_bound: (2.0f64).max(b * (gradient_bound + 1.0)),
        };
        Self { dim, drift_amplitude, constants }
    }

    pub fn drift_amplitude(&self) -> f64 {
        self.drift_amplitude
    }

    pub fn with_constants(mut self, constants: GrowthConstants) -> Self {
        self.constants = constants;
        self
    }

    #[inline]
    fn drift(&self, xi: f64) -> f64 {
        self.drift_amplitude * xi.sin()
    }
}

impl HamiltonianModel for QuadraticHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_h(&self, x: &[f64], p: &[f64]) -> f64 {
        x.iter().zip(p).map(|(&xi, &pi)| pi * pi + self.drift(xi) * pi).sum()
    }

    fn grad_p_h(&self, x: &[f64], p: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = 2.0 * p[i] + self.drift(x[i]);
        }
    }

    fn grad_x_h(&self, x: &[f64], p: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = self.drift_amplitude * x[i].cos() * p[i];
        }
    }

    fn eval_l(&self, x: &[f64], a: &[f64]) -> f64 {
        x.iter()
            .zip(a)
            .map(|(&xi, &ai)| {
                let s = ai + self.drift(xi);
                0.25 * s * s
            })
            .sum()
    }

    fn grad_a_l(&self, x: &[f64], a: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = 0.5 * (a[i] + self.drift(x[i]));
        }
    }

    fn constants(&self) -> GrowthConstants {
        self.constants
    }

    fn is_state_independent(&self) -> bool {
        self.drift_amplitude == 0.0
    }

    fn godunov_line(&self, x: &[f64], pm: &[f64], pp: &[f64], out: &mut [f64]) {
        // H = (p + V/2)^2 - V^2/4, whose upwind flux has a closed form
        if self.drift_amplitude == 0.0 {
            for ((o, &m), &p) in out.iter_mut().zip(pm).zip(pp) {
                let f = p.min(0.0);
                let b = m.max(0.0);
                *o = (f * f).max(b * b);
            }
        } else {
            for i in 0..out.len() {
                let half_v = 0.5 * self.drift(x[i]);
                let f = (pp[i] + half_v).min(0.0);
                let b = (pm[i] + half_v).max(0.0);
                out[i] = (f * f).max(b * b) - half_v * half_v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_closed_form_flux_matches_generic() {
        for &b in &[0.0, 0.7] {
            let h = QuadraticHamiltonian::new(1, b, 1.0);
            let xs = [-1.3, 0.0, 0.4, 2.0];
            let pm = [-1.0, 0.5, -0.2, 0.3];
            let pp = [0.5, -0.3, 0.2, -1.1];
            let mut out = [0.0; 4];
            h.godunov_line(&xs, &pm, &pp, &mut out);
            for i in 0..4 {
                let g = godunov_generic(&h, xs[i], pm[i], pp[i]);
                assert!((out[i] - g).abs() < 1e-14, "{} vs {}", out[i], g);
            }
        }
    }

    #[test]
    fn test_flux_consistent_with_h() {
        let h = QuadraticHamiltonian::new(1, 0.5, 1.0);
        for &p in &[-2.0, -0.1, 0.0, 0.3, 1.5] {
            let mut out = [0.0];
            h.godunov_line(&[0.8], &[p], &[p], &mut out);
            assert!((out[0] - h.eval_h(&[0.8], &[p])).abs() < 1e-14);
        }
    }
}
