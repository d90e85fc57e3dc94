use mfc_lab::model::{builtin_model, ModelParams};
use mfc_lab::partition::{build_partition, cells_per_axis, covering_constant, residual_check};
use proptest::prelude::*;

fn benchmark() -> mfc_lab::model::ModelConfig {
    builtin_model("quadratic-mean", &ModelParams::new()).unwrap()
}

/// Points of `[-r, r]^dim` clipped to the ball of radius `r`.
fn in_ball(raw: &[f64], dim: usize, r: f64) -> Vec<f64> {
    raw.chunks(dim)
        .flat_map(|a| {
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let s = if norm > r { r / norm } else { 1.0 };
            a.iter().map(move |v| v * s).collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn interval_example() {
    let p = build_partition(&[-0.9, -0.1, 0.8], 1, 1.0, 0.5).unwrap();
    assert_eq!(p.cells, vec![vec![0, 1], vec![2]]);
    assert_eq!(p.representatives, vec![vec![-0.5], vec![0.5]]);
    assert_eq!(p.assignment(), vec![0, 0, 1]);
    assert_eq!(p.cell_side(), 1.0);
    assert_eq!(cells_per_axis(1.0, 0.5, 1), 2);
}

#[test]
fn boundary_values_fall_in_the_end_cells() {
    let p = build_partition(&[-1.0, 0.0, 1.0], 1, 1.0, 0.5).unwrap();
    assert_eq!(p.cells, vec![vec![0], vec![1, 2]]);
}

#[test]
fn residual_of_a_displaced_control_is_a_quarter_of_its_square() {
    // H = p², L = a²/4: the residual is (ā - a*)²/4 with a* = -2p
    let cfg = benchmark();
    let p = build_partition(&[0.0], 1, 1.0, 0.5).unwrap();
    let r = residual_check(&p, &[0.3], &[0.0], cfg.hamiltonian.as_ref()).unwrap();
    assert!((r.max - 0.0625).abs() < 1e-15);
}

#[test]
fn exact_feedback_has_zero_residual() {
    let cfg = benchmark();
    let feedback = [-0.75, -0.25, 0.25, 0.75];
    let p = build_partition(&feedback, 1, 1.0, 0.25).unwrap();
    assert_eq!(p.n_cells(), 4);
    let grads: Vec<f64> = feedback.iter().map(|a| -a / 2.0).collect();
    let r = residual_check(&p, &[0.0, 1.0, 2.0, 3.0], &grads, cfg.hamiltonian.as_ref()).unwrap();
    assert_eq!(r.max, 0.0);
    assert!(residual_check(&p, &[0.0], &grads, cfg.hamiltonian.as_ref()).is_err());
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(build_partition(&[1.2], 1, 1.0, 0.1).is_err());
    assert!(build_partition(&[0.1, 0.2, 0.3], 2, 1.0, 0.1).is_err());
    assert!(build_partition(&[0.1], 1, 1.0, 0.0).is_err());
    assert!(build_partition(&[0.1], 1, 0.0, 0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn partition_invariants(
        dim in 1usize..=2,
        raw in prop::collection::vec(-2.0f64..2.0, 2..200),
        r in 0.5f64..2.0,
        frac in 0.01f64..1.0,
    ) {
        let raw = &raw[..raw.len() / dim * dim];
        let feedback = in_ball(&raw.iter().map(|v| v * r / 2.0).collect::<Vec<_>>(), dim, r);
        let delta = frac * r * (dim as f64).sqrt();
        let p = build_partition(&feedback, dim, r, delta).unwrap();
        let n = feedback.len() / dim;

        let mut seen = vec![0usize; n];
        for cell in &p.cells {
            prop_assert!(!cell.is_empty());
            for &k in cell {
                seen[k] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));

        let cell_of = p.assignment();
        for k in 0..n {
            let a = &feedback[k * dim..(k + 1) * dim];
            let rep = &p.representatives[cell_of[k]];
            let dist = a.iter().zip(rep).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(dist <= delta * (1.0 + 1e-12), "{dist} > {delta}");
        }
        prop_assert!(p.n_cells() as f64 * delta.powi(dim as i32) <= covering_constant(r, dim) * (1.0 + 1e-12));
    }
}
