use mfc_lab::measures::Grid1D;
use mfc_lab::model::{builtin_model, ModelConfig, ModelParams};
use mfc_lab::nparticle::{
    export_tensor, lipschitz_check, optimal_feedback, policy_evaluate_mc, read_tensor, semiconcavity_check, solve_hjb,
    solve_hjb_with, NParticleProblem, Retention, ValueTensor,
};
use mfc_lab::numerics::{composite_gauss_legendre, normal_pdf};
use mfc_lab::Error;
use rand::{Rng, SeedableRng};

fn model(name: &str, params: &[(&str, f64)]) -> ModelConfig {
    let p: ModelParams = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_model(name, &p).unwrap()
}

fn solve(cfg: ModelConfig, n: usize, points: usize, half: f64) -> (NParticleProblem, ValueTensor) {
    let prob = NParticleProblem::with_cfl(cfg, n, Grid1D::symmetric(half, points).unwrap(), 0.9).unwrap();
    let v = solve_hjb(&prob).unwrap();
    (prob, v)
}

/// `w(0, y)` for `-w_t - ν w'' + |w'|² = 0`, `w(T) = atan`, by the Cole-Hopf
/// transform `w = -ν ln E[exp(-g(y + √(2νT) Z)/ν)]`.
fn cole_hopf(nu: f64, horizon: f64, y: f64) -> f64 {
    let s = (2.0 * nu * horizon).sqrt();
    let e = composite_gauss_legendre(-12.0, 12.0, 400, |z| normal_pdf(z) * (-(y + s * z).atan() / nu).exp());
    -nu * e.ln()
}

/// Explicit Godunov solve of `-v_t - v'' + H(x, v') = 0` for
/// `H = (p + c)² - c²` with `c = b sin(x) / 2`, Neumann ends, written
/// independently of the library scheme.
fn reference_1d(cfg: &ModelConfig, b: f64, grid: Grid1D, steps: usize) -> Vec<f64> {
    let h = grid.spacing();
    let dt = cfg.horizon / steps as f64;
    let xs = grid.nodes();
    let mut v: Vec<f64> = xs.iter().map(|&x| x.atan()).collect();
    let n = v.len();
    for _ in 0..steps {
        let mut next = v.clone();
        for i in 0..n {
            let l = if i == 0 { 2.0 * v[0] - v[1] } else { v[i - 1] };
            let r = if i == n - 1 { 2.0 * v[i] - v[i - 1] } else { v[i + 1] };
            let (pm, pp) = ((v[i] - l) / h, (r - v[i]) / h);
            let c = 0.5 * b * xs[i].sin();
            let ham = |p: f64| (p + c) * (p + c) - c * c;
            let flux = if pm <= pp { ham((-c).clamp(pm, pp)) } else { ham(pm).max(ham(pp)) };
            next[i] = v[i] + dt * ((r - 2.0 * v[i] + l) / (h * h) - flux);
        }
        v = next;
    }
    v
}

#[test]
fn zero_costs_give_zero_value_and_zero_cost() {
    let cfg = model("quadratic-mean", &[("terminal_weight", 0.0)]);
    for n in 1..=3 {
        let (prob, v) = solve(cfg.clone(), n, 21, 3.0);
        assert!(v.initial().iter().all(|x| x.abs() < 1e-10));
        assert_eq!(lipschitz_check(&v).value, 0.0);
        assert_eq!(semiconcavity_check(&v, 100, 1).unwrap().max_ratio, 0.0);
        let fb = optimal_feedback(&v, prob.cfg.hamiltonian.as_ref(), 0, &vec![0.4; n]).unwrap();
        assert!(fb.iter().all(|a| *a == 0.0));
        let mc = policy_evaluate_mc(&prob, &v, &vec![0.1; n], 1000, 3).unwrap();
        assert_eq!((mc.mean, mc.stderr), (0.0, 0.0));
    }
}

#[test]
fn single_particle_matches_cole_hopf() {
    let (_, v) = solve(model("quadratic-mean", &[]), 1, 401, 6.0);
    for y in [-1.0, 0.0, 0.5, 1.5] {
        let exact = cole_hopf(1.0, 0.5, y);
        let got = v.interpolate(0, &[y]);
        assert!((got - exact).abs() < 2e-3, "y = {y}: {got} vs {exact}");
    }
}

#[test]
fn two_particles_match_cole_hopf_of_the_mean() {
    let (_, v) = solve(model("quadratic-mean", &[]), 2, 201, 5.0);
    let exact = cole_hopf(0.5, 0.5, 0.0);
    assert!((v.interpolate(0, &[0.0, 0.0]) - exact).abs() < 1e-2);
    // any state with the same mean
    assert!((v.interpolate(0, &[-0.5, 0.5]) - exact).abs() < 1e-2);
}

#[test]
fn common_noise_adds_viscosity() {
    // with one particle the common noise is an extra diffusion of size a0
    let (_, v) = solve(model("quadratic-mean", &[("a0", 0.5)]), 1, 401, 6.0);
    let exact = cole_hopf(1.5, 0.5, 0.0);
    assert!((v.interpolate(0, &[0.0]) - exact).abs() < 2e-3);
    let (_, v2) = solve(model("quadratic-mean", &[("a0", 0.5)]), 2, 161, 5.0);
    let exact2 = cole_hopf(1.0, 0.5, 0.2);
    assert!((v2.interpolate(0, &[0.2, 0.2]) - exact2).abs() < 1e-2);
}

#[test]
fn state_dependent_model_matches_reference_solver() {
    let cfg = model("quadratic-drift", &[]);
    let grid = Grid1D::symmetric(5.0, 401).unwrap();
    let (_, v) = solve(cfg.clone(), 1, 201, 5.0);
    let reference = reference_1d(&cfg, 0.5, grid, 4000);
    for y in [-1.0, 0.0, 0.7, 2.0] {
        let r = grid.interpolate(&reference, y);
        let got = v.interpolate(0, &[y]);
        assert!((got - r).abs() < 5e-3, "y = {y}: {got} vs {r}");
    }
}

#[test]
fn terminal_slice_and_comparison_bound() {
    let (_, v) = solve(model("quadratic-mean", &[]), 2, 41, 3.0);
    let last = v.terminal().unwrap();
    for (flat, val) in last.iter().enumerate() {
        let x = v.node_state(flat);
        assert_eq!(*val, (0.5 * (x[0] + x[1])).atan());
    }
    let bound = std::f64::consts::FRAC_PI_2;
    for s in 0..v.n_slices() {
        assert!(v.slice(s).iter().all(|x| x.abs() <= bound));
    }
}

#[test]
fn values_are_symmetric_under_particle_permutation() {
    let (_, v) = solve(model("quadratic-drift", &[]), 3, 21, 3.0);
    let n = 21;
    for s in [0, v.n_slices() / 2] {
        let slice = v.slice(s);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let a = slice[v.flat_index(&[i, j, k])];
                    for perm in [[j, i, k], [k, j, i], [i, k, j], [j, k, i]] {
                        assert!((a - slice[v.flat_index(&perm)]).abs() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn larger_terminal_cost_gives_larger_values() {
    // the bump profile is nonnegative, so doubling it raises G pointwise
    let (_, lo) = solve(model("nonconvex-mean", &[("terminal_weight", 1.0)]), 2, 41, 4.0);
    let (_, hi) = solve(model("nonconvex-mean", &[("terminal_weight", 2.0)]), 2, 41, 4.0);
    for s in 0..lo.n_slices() {
        assert!(lo.slice(s).iter().zip(hi.slice(s)).all(|(a, b)| a <= b));
    }
}

#[test]
fn feedback_is_bounded_and_symmetric() {
    let (prob, v) = solve(model("quadratic-mean", &[]), 2, 61, 4.0);
    let ham = prob.cfg.hamiltonian.as_ref();
    let radius = ham.constants().control_radius;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let slice = rng.gen_range(0..v.n_slices());
        let flat = rng.gen_range(0..v.node_count());
        let fb = optimal_feedback(&v, ham, slice, &v.node_state(flat)).unwrap();
        assert!(fb.iter().all(|a| a.abs() <= radius));
    }
    for y in [-1.0, 0.0, 0.9] {
        let fb = optimal_feedback(&v, ham, 0, &[y, y]).unwrap();
        assert!((fb[0] - fb[1]).abs() < 1e-12);
    }
}

#[test]
fn single_particle_lipschitz_bound() {
    // |w'| ≤ sup|g'| = 1 for a state-independent Hamiltonian
    let (_, v) = solve(model("quadratic-mean", &[]), 1, 201, 5.0);
    let l = lipschitz_check(&v).value;
    assert!(l <= 1.0 + 1e-9 && l > 0.9, "{l}");
}

#[test]
fn monte_carlo_matches_the_solve() {
    let (prob, v) = solve(model("quadratic-mean", &[]), 1, 201, 5.0);
    let x0 = 0.3;
    let mc = policy_evaluate_mc(&prob, &v, &[x0], 4000, 9).unwrap();
    let exact = v.interpolate(0, &[x0]);
    assert!((mc.mean - exact).abs() < 3.0 * mc.stderr + 2e-3, "{mc:?} vs {exact}");
    assert!(mc.discarded == 0);
}

#[test]
fn export_round_trip() {
    let prob =
        NParticleProblem::with_cfl(model("quadratic-mean", &[]), 2, Grid1D::symmetric(2.0, 11).unwrap(), 0.9).unwrap();
    let v = solve_hjb_with(&prob, Retention::Every(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    export_tensor(&v, dir.path()).unwrap();
    let back = read_tensor(dir.path()).unwrap();
    assert_eq!(back.slice_steps(), v.slice_steps());
    for s in 0..v.n_slices() {
        assert_eq!(back.slice(s), v.slice(s));
    }
}

#[test]
fn guards() {
    let cfg = model("quadratic-mean", &[]);
    let grid = Grid1D::symmetric(1.0, 5).unwrap();
    assert!(matches!(NParticleProblem::new(cfg.clone(), 5, grid, 10), Err(Error::Unsupported(_))));
    assert!(NParticleProblem::new(cfg.clone(), 1, grid, 1).is_err());
    let fine = Grid1D::symmetric(1.0, 201).unwrap();
    let prob = NParticleProblem::new(cfg, 1, fine, 2).unwrap();
    assert!(matches!(solve_hjb(&prob), Err(Error::StepRestriction { .. })));
}
