use mfc_lab::lipnet::{
    build_net_1d, calibrate_hoeffding, dual_lower_bound, extend_tilde, hoeffding_margin, sup_distance, tail_experiment,
    LipNet, PiecewiseLinearLip,
};
use mfc_lab::measures::{w1_exact_1d, EmpiricalMeasure, GaussianMixture, Measure};
use mfc_lab::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

/// Random 1-Lipschitz piecewise-linear function on `[-r, r]` with values in `[-r, r]`.
fn random_lip(rng: &mut impl Rng, r: f64) -> PiecewiseLinearLip {
    let k = rng.gen_range(2..12);
    let mut xs: Vec<f64> = (0..k).map(|_| rng.gen_range(-r..r)).collect();
    xs.push(-r);
    xs.push(r);
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut vals = vec![rng.gen_range(-r..r)];
    for w in xs.windows(2) {
        let next = vals.last().unwrap() + rng.gen_range(-1.0..1.0) * (w[1] - w[0]);
        vals.push(next.clamp(-r, r));
    }
    PiecewiseLinearLip::new(xs, vals, r).unwrap()
}

fn cloud(xs: Vec<f64>) -> Measure {
    EmpiricalMeasure::from_1d(xs).unwrap().into()
}

#[test]
fn extension_examples() {
    let zero = extend_tilde(&PiecewiseLinearLip::zero(1.0).unwrap(), 1.0);
    for x in [-3.0, -1.5, 0.0, 0.7, 1.9] {
        assert_eq!(zero.eval(x), 0.0);
    }
    let id = extend_tilde(&PiecewiseLinearLip::identity(1.0).unwrap(), 1.0);
    assert!((id.eval(1.5) - 0.5).abs() < 1e-15);
    assert_eq!(id.eval(2.0), 0.0);
    assert_eq!(id.eval(-2.0), 0.0);
    assert_eq!(id.eval(7.0), 0.0);
}

#[test]
fn net_examples() {
    let net = build_net_1d(1.0, 1.0).unwrap();
    let members = net.members();
    assert!(members.len() <= 27 && net.size_bound() <= 27.0);
    let zero = PiecewiseLinearLip::zero(1.0).unwrap();
    assert!(members.iter().any(|m| sup_distance(m, &zero, 1.0, 101) == 0.0));
    let id = PiecewiseLinearLip::identity(1.0).unwrap();
    assert!(sup_distance(&zero, &id, 1.0, 1001) <= 1.0);
    assert!(matches!(build_net_1d(0.01, 1.0), Err(Error::NetTooLarge { .. })));
}

#[test]
fn net_covers_random_functions_by_enumeration() {
    let (eps, r) = (0.5, 1.0);
    let net = build_net_1d(eps, r).unwrap();
    let members = net.members();
    assert!(members.len() as f64 <= net.size_bound());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let phi = random_lip(&mut rng, r);
        let best = members.iter().map(|m| sup_distance(m, &phi, r, 401)).fold(f64::INFINITY, f64::min);
        assert!(best <= eps + 1e-12, "distance {best}");
    }
}

#[test]
fn rounding_lands_within_epsilon() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for (eps, r) in [(0.25, 1.0), (0.3, 2.0), (0.1, 1.0)] {
        let net = build_net_1d(eps, r).unwrap();
        for _ in 0..200 {
            let phi = random_lip(&mut rng, r);
            let m = net.nearest_member(&phi);
            assert!(m.lipschitz_constant() <= 1.0 + 1e-12);
            assert!(sup_distance(&m, &phi, r, 4001) <= eps + 1e-12);
        }
    }
}

#[test]
fn dual_bound_examples() {
    let net = build_net_1d(0.25, 2.0).unwrap();
    let same = dual_lower_bound(&Measure::dirac(0.3), &Measure::dirac(0.3), &net).unwrap();
    assert!(same.value.abs() < 1e-15);
    let v = dual_lower_bound(&Measure::dirac(0.0), &Measure::dirac(1.0), &net).unwrap().value;
    assert!((0.75..=1.0 + 1e-12).contains(&v), "{v}");
}

#[test]
fn dual_bound_is_monotone_in_the_net() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mu = cloud((0..25).map(|_| rng.gen_range(-1.5..1.0)).collect());
    let nu: Measure = GaussianMixture::normal(0.4, 0.6).unwrap().into();
    let pool: Vec<PiecewiseLinearLip> = (0..40).map(|_| random_lip(&mut rng, 1.0)).collect();
    let mut prev = f64::NEG_INFINITY;
    for k in [1, 5, 10, 20, 40] {
        let net = LipNet::explicit(0.5, 1.0, pool[..k].to_vec()).unwrap();
        let v = dual_lower_bound(&mu, &nu, &net).unwrap().value;
        assert!(v >= prev - 1e-15);
        prev = v;
    }
    let lattice = build_net_1d(0.5, 1.0).unwrap();
    let full = LipNet::explicit(0.5, 1.0, lattice.members()).unwrap();
    let a = dual_lower_bound(&mu, &nu, &lattice).unwrap().value;
    let b = dual_lower_bound(&mu, &nu, &full).unwrap().value;
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn zero_test_function_has_degenerate_tail() {
    let curve = tail_experiment(&PiecewiseLinearLip::zero(1.0).unwrap(), 10, 1.0, 0.0, 10_000, 1).unwrap();
    assert_eq!(curve.mean, 0.0);
    assert_eq!(curve.variance, 0.0);
    assert_eq!(curve.points.len(), 1);
    assert_eq!(curve.points[0].exceed_count, 0);
}

#[test]
fn linear_statistic_variance_and_tail() {
    let phi = PiecewiseLinearLip::identity(20.0).unwrap();
    let curve = tail_experiment(&phi, 100, 1.0, 0.0, 100_000, 3).unwrap();
    assert!((curve.variance / 0.02 - 1.0).abs() < 0.05, "variance {}", curve.variance);
    assert!(hoeffding_margin(&curve, 4.0, 30) <= 0.0);
    let c = calibrate_hoeffding(&curve, 30).unwrap();
    assert!(c > 0.0 && c <= 4.0, "calibrated {c}");
    assert!(tail_experiment(&phi, 100, 1.0, 0.0, 999, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extension_is_one_lipschitz(seed in any::<u64>(), r in 0.5f64..3.0) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ext = extend_tilde(&random_lip(&mut rng, r), r);
        let xs: Vec<f64> = (0..=2000).map(|i| -2.5 * r + 5.0 * r * i as f64 / 2000.0).collect();
        for w in xs.windows(2) {
            let q = (ext.eval(w[1]) - ext.eval(w[0])).abs() / (w[1] - w[0]);
            prop_assert!(q <= 1.0 + 1e-12);
        }
        prop_assert_eq!(ext.eval(2.0 * r), 0.0);
        prop_assert_eq!(ext.eval(-2.0 * r), 0.0);
    }

    #[test]
    fn dual_bound_never_exceeds_w1(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..30);
        let mu = cloud((0..n).map(|_| rng.gen_range(-3.0..3.0)).collect());
        let nu = cloud((0..rng.gen_range(1..30)).map(|_| rng.gen_range(-3.0..3.0)).collect());
        let net = build_net_1d(0.25, 1.5).unwrap();
        let v = dual_lower_bound(&mu, &nu, &net).unwrap().value;
        prop_assert!(v <= w1_exact_1d(&mu, &nu).unwrap() + 1e-12);
    }

    #[test]
    fn non_lipschitz_input_is_rejected(slope in 1.01f64..5.0) {
        let r = PiecewiseLinearLip::new(vec![0.0, 0.1], vec![0.0, 0.1 * slope], 1.0);
        let is_not_lipschitz = matches!(r, Err(Error::NotLipschitz { .. }));
        prop_assert!(is_not_lipschitz);
    }
}
