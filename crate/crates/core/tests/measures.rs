use mfc_lab::measures::{
    hungarian, moment, pushforward_shift, read_cloud_csv, read_density_csv, sample, w1_assignment, w1_exact_1d,
    write_cloud_csv, write_density_csv, DiscreteDensity, EmpiricalMeasure, GaussianMixture, Grid1D, Measure,
};
use proptest::prelude::*;

fn cloud(xs: &[f64]) -> EmpiricalMeasure {
    EmpiricalMeasure::from_1d(xs.to_vec()).unwrap()
}

fn m1(xs: &[f64]) -> Measure {
    cloud(xs).into()
}

/// Minimum over all permutations of the mean matching cost.
fn brute_force_w1(dim: usize, a: &[f64], b: &[f64]) -> f64 {
    fn permute(k: usize, perm: &mut Vec<usize>, best: &mut f64, cost: &dyn Fn(&[usize]) -> f64) {
        if k == perm.len() {
            *best = best.min(cost(perm));
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(k + 1, perm, best, cost);
            perm.swap(k, i);
        }
    }
    let n = a.len() / dim;
    let cost = |p: &[usize]| -> f64 {
        (0..n).map(|i| (0..dim).map(|c| (a[i * dim + c] - b[p[i] * dim + c]).powi(2)).sum::<f64>().sqrt()).sum::<f64>()
            / n as f64
    };
    let mut best = f64::INFINITY;
    permute(0, &mut (0..n).collect(), &mut best, &cost);
    best
}

#[test]
fn exact_w1_examples() {
    assert_eq!(w1_exact_1d(&Measure::dirac(0.0), &Measure::dirac(1.0)).unwrap(), 1.0);
    assert_eq!(w1_exact_1d(&m1(&[0.0, 1.0]), &m1(&[0.0, 1.0])).unwrap(), 0.0);
    assert!((w1_exact_1d(&m1(&[0.0, 1.0]), &m1(&[0.5, 1.5])).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn assignment_examples() {
    assert_eq!(w1_assignment(&cloud(&[0.0, 1.0]), &cloud(&[1.0, 0.0])).unwrap(), 0.0);
    let a = EmpiricalMeasure::new(2, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
    let b = EmpiricalMeasure::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    assert!((w1_assignment(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(w1_assignment(&cloud(&[0.0]), &cloud(&[3.0])).unwrap(), 3.0);
    assert!(w1_assignment(&cloud(&[0.0]), &cloud(&[0.0, 1.0])).is_err());
}

#[test]
fn moment_examples() {
    assert_eq!(moment(&m1(&[1.0, -1.0]), 2.0).unwrap(), 1.0);
    assert_eq!(moment(&Measure::dirac(0.0), 2.0).unwrap(), 0.0);
    let uniform = DiscreteDensity::uniform(Grid1D::new(0.0, 1.0, 101).unwrap());
    assert!((moment(&uniform.into(), 1.0).unwrap() - 0.5).abs() < 1e-9);
    assert!(moment(&Measure::dirac(0.0), 0.5).is_err());
}

#[test]
fn shift_examples() {
    let shifted = pushforward_shift(&m1(&[0.0, 1.0]), &[2.0]).unwrap();
    assert_eq!(shifted, m1(&[2.0, 3.0]));
    let d: Measure = DiscreteDensity::gaussian(Grid1D::symmetric(4.0, 81).unwrap(), 0.0, 1.0).unwrap().into();
    assert_eq!(pushforward_shift(&d, &[0.0]).unwrap(), d);
    let Measure::Density(s) = pushforward_shift(&d, &[0.7]).unwrap() else { panic!() };
    assert!((s.mass() - 1.0).abs() < 1e-12);
    assert!((s.mean() - 0.7).abs() < 1e-12);
}

#[test]
fn sample_examples() {
    let grid = Grid1D::symmetric(1.0, 21).unwrap();
    let mut w = vec![0.0; 21];
    w[10] = 1.0 / grid.spacing();
    let spike: Measure = DiscreteDensity::new(grid, w).unwrap().into();
    let pts = sample(&spike, 5, 3).unwrap();
    assert_eq!(pts.len(), 5);
    assert!(pts.points().iter().all(|x| x.abs() <= grid.spacing()));

    let normal: Measure = GaussianMixture::normal(0.0, 1.0).unwrap().into();
    let big = sample(&normal, 100_000, 7).unwrap();
    assert!(big.mean()[0].abs() < 3.0 * 10f64.powf(-2.5));
    assert!(sample(&normal, 0, 1).is_err());
    assert_eq!(sample(&normal, 50, 9).unwrap(), sample(&normal, 50, 9).unwrap());
}

#[test]
fn mixture_against_closed_forms() {
    // W1 between N(0,1) and N(c,1) is |c|
    let a: Measure = GaussianMixture::normal(0.0, 1.0).unwrap().into();
    let b: Measure = GaussianMixture::normal(0.8, 1.0).unwrap().into();
    assert!((w1_exact_1d(&a, &b).unwrap() - 0.8).abs() < 1e-8);
    // W1 between N(0,σ²) and δ₀ is σ√(2/π)
    let s = 1.7;
    let g: Measure = GaussianMixture::normal(0.0, s).unwrap().into();
    let expect = s * (2.0 / std::f64::consts::PI).sqrt();
    assert!((w1_exact_1d(&g, &Measure::dirac(0.0)).unwrap() - expect).abs() < 1e-8 * expect);
    assert!((moment(&g, 2.0).unwrap() - s * s).abs() < 1e-9);
}

#[test]
fn heat_flow_moments() {
    let init = cloud(&[-1.0, 0.5, 2.0]);
    let m = GaussianMixture::heat_flow(&init, &[0.3], 0.25).unwrap();
    assert!((m.mean()[0] - (0.5 + 0.075)).abs() < 1e-14);
    let expect: f64 = [-1.0f64, 0.5, 2.0].iter().map(|x| (x + 0.075).powi(2)).sum::<f64>() / 3.0 + 0.5;
    assert!((m.second_moment() - expect).abs() < 1e-12);
}

#[test]
fn csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let c = EmpiricalMeasure::new(2, vec![0.1, -2.0, 3.5, 1e-9]).unwrap();
    write_cloud_csv(&dir.path().join("c.csv"), &c).unwrap();
    assert_eq!(read_cloud_csv(&dir.path().join("c.csv")).unwrap(), c);
    let d = DiscreteDensity::gaussian(Grid1D::symmetric(3.0, 31).unwrap(), 0.2, 0.5).unwrap();
    write_density_csv(&dir.path().join("d.csv"), &d).unwrap();
    let back = read_density_csv(&dir.path().join("d.csv")).unwrap();
    assert_eq!(back.weights(), d.weights());
}

#[test]
fn density_cic_preserves_mass_and_mean() {
    let grid = Grid1D::symmetric(3.0, 61).unwrap();
    let pts = cloud(&[-1.23, 0.0, 0.41, 2.5]);
    let d = DiscreteDensity::from_points_cic(grid, &pts).unwrap();
    assert!((d.mass() - 1.0).abs() < 1e-12);
    assert!((d.mean() - pts.mean()[0]).abs() < 1e-12);
}

fn points(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_matches_assignment_in_1d(ab in (1usize..40).prop_flat_map(|n| (points(n..n + 1), points(n..n + 1)))) {
        let (a, b) = ab;
        let exact = w1_exact_1d(&m1(&a), &m1(&b)).unwrap();
        let assign = w1_assignment(&cloud(&a), &cloud(&b)).unwrap();
        prop_assert!((exact - assign).abs() < 1e-10);
    }

    #[test]
    fn assignment_matches_brute_force(dim in 1usize..3, n in 1usize..7, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let w = w1_assignment(&EmpiricalMeasure::new(dim, a.clone()).unwrap(), &EmpiricalMeasure::new(dim, b.clone()).unwrap()).unwrap();
        prop_assert!((w - brute_force_w1(dim, &a, &b)).abs() < 1e-12);
    }

    #[test]
    fn metric_axioms(dim in 1usize..3, n in 1usize..12, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || EmpiricalMeasure::new(dim, (0..n * dim).map(|_| rng.gen_range(-5.0..5.0)).collect()).unwrap();
        let (x, y, z) = (draw(), draw(), draw());
        let xy = w1_assignment(&x, &y).unwrap();
        prop_assert!(xy >= 0.0);
        prop_assert!((xy - w1_assignment(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!(w1_assignment(&x, &x).unwrap().abs() < 1e-15);
        prop_assert!(xy <= w1_assignment(&x, &z).unwrap() + w1_assignment(&z, &y).unwrap() + 1e-12);
    }

    #[test]
    fn translation_invariance(a in points(1..30), b in points(1..30), z in -20.0f64..20.0) {
        let (ma, mb) = (m1(&a), m1(&b));
        let before = w1_exact_1d(&ma, &mb).unwrap();
        let after = w1_exact_1d(&pushforward_shift(&ma, &[z]).unwrap(), &pushforward_shift(&mb, &[z]).unwrap()).unwrap();
        prop_assert!((before - after).abs() < 1e-9 * (1.0 + before));
    }

    #[test]
    fn shifted_first_moment(a in points(1..30), z in -20.0f64..20.0) {
        let m = m1(&a);
        let shifted = moment(&pushforward_shift(&m, &[z]).unwrap(), 1.0).unwrap();
        prop_assert!(shifted <= moment(&m, 1.0).unwrap() + z.abs() + 1e-12);
    }

    #[test]
    fn zero_scale_mixture_is_its_centers(a in points(1..30), off in -3.0f64..3.0) {
        let mix: Measure = GaussianMixture::new(1, a.clone(), 0.0, vec![off]).unwrap().into();
        let pts: Vec<f64> = a.iter().map(|x| x + off).collect();
        prop_assert!(w1_exact_1d(&mix, &m1(&pts)).unwrap() < 1e-12);
        prop_assert!((moment(&mix, 2.0).unwrap() - moment(&m1(&pts), 2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn mixture_against_own_shift_is_the_shift(a in points(1..20), s in 0.05f64..2.0, z in -3.0f64..3.0) {
        let mix: Measure = GaussianMixture::new(1, a, s, vec![0.0]).unwrap().into();
        let w = w1_exact_1d(&mix, &pushforward_shift(&mix, &[z]).unwrap()).unwrap();
        prop_assert!((w - z.abs()).abs() < 1e-8 * (1.0 + z.abs()));
    }

    #[test]
    fn hungarian_is_a_permutation(n in 1usize..9, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cost: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut p = hungarian(n, &cost);
        p.sort_unstable();
        prop_assert_eq!(p, (0..n).collect::<Vec<_>>());
    }
}
