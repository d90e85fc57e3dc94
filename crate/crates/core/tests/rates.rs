use mfc_lab::rates::{bootstrap_ci, fit_with_ci, loglog_fit, RatePoint};
use mfc_lab::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

fn power_law(c: f64, slope: f64, ns: &[f64]) -> Vec<(f64, f64)> {
    ns.iter().map(|&n| (n, c * n.powf(slope))).collect()
}

#[test]
fn exact_power_laws() {
    let f = loglog_fit(&power_law(3.0, -0.5, &[4.0, 16.0, 64.0, 256.0])).unwrap();
    assert!((f.slope + 0.5).abs() < 1e-13);
    assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    assert!((f.r_squared - 1.0).abs() < 1e-13);
    assert!((f.predict(100.0) - 0.3).abs() < 1e-12);
    assert!(f.ci_excludes_zero());
    let flat = loglog_fit(&[(1.0, 2.0), (2.0, 2.0), (3.0, 2.0)]).unwrap();
    assert_eq!(flat.slope, 0.0);
    assert!(!flat.ci_excludes_zero());
}

#[test]
fn fits_need_three_positive_increasing_points() {
    assert!(matches!(loglog_fit(&[(1.0, 1.0), (2.0, 0.5)]), Err(Error::InsufficientData(_))));
    assert!(loglog_fit(&[(1.0, 1.0), (2.0, -0.5), (3.0, 0.1)]).is_err());
    assert!(loglog_fit(&[(1.0, 1.0), (1.0, 0.5), (3.0, 0.1)]).is_err());
    assert!(loglog_fit(&[(0.0, 1.0), (1.0, 0.5), (3.0, 0.1)]).is_err());
}

#[test]
fn bootstrap_guards_and_degenerate_interval() {
    let pts: Vec<RatePoint> =
        power_law(1.0, -1.0, &[1.0, 2.0, 4.0, 8.0]).into_iter().map(|(n, v)| RatePoint::new(n, v, 0.0)).collect();
    assert!(bootstrap_ci(&pts, 10, 1).is_err());
    let f = fit_with_ci(&pts, 500, 1).unwrap();
    assert!((f.ci_lo + 1.0).abs() < 1e-13 && (f.ci_hi + 1.0).abs() < 1e-13);
    assert!(bootstrap_ci(&pts[..2], 500, 1).is_err());
}

#[test]
fn bootstrap_interval_covers_the_true_slope() {
    let ns = [10.0, 40.0, 160.0, 640.0, 2560.0];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    let reps = 200;
    let mut covered = 0;
    for rep in 0..reps {
        let pts: Vec<RatePoint> = power_law(2.0, -0.5, &ns)
            .into_iter()
            .map(|(n, v)| {
                let se = 0.05 * v;
                let z: f64 = StandardNormal.sample(&mut rng);
                RatePoint::new(n, v + se * z, se)
            })
            .collect();
        let f = fit_with_ci(&pts, 400, rep).unwrap();
        assert!(f.ci_lo <= f.slope && f.slope <= f.ci_hi);
        if f.ci_lo <= -0.5 && -0.5 <= f.ci_hi {
            covered += 1;
        }
    }
    let rate = covered as f64 / reps as f64;
    assert!((0.88..=1.0).contains(&rate), "coverage {rate}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_is_equivariant_under_scaling(
        vals in prop::collection::vec(0.01f64..10.0, 3..8),
        c in 0.01f64..100.0,
        k in 0.1f64..50.0,
    ) {
        let pts: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect();
        let base = loglog_fit(&pts).unwrap();
        let up = loglog_fit(&pts.iter().map(|&(n, v)| (n, c * v)).collect::<Vec<_>>()).unwrap();
        prop_assert!((up.slope - base.slope).abs() < 1e-9);
        prop_assert!((up.intercept - base.intercept - c.ln()).abs() < 1e-9);
        let wide = loglog_fit(&pts.iter().map(|&(n, v)| (k * n, v)).collect::<Vec<_>>()).unwrap();
        prop_assert!((wide.slope - base.slope).abs() < 1e-9);
        prop_assert!((wide.intercept - base.intercept + base.slope * k.ln()).abs() < 1e-8);
        prop_assert!((wide.r_squared - base.r_squared).abs() < 1e-9);
    }
}
