use mfc_lab::concentration::{
    calibrated_bound_check, common_noise_shift_check, fournier_guillin, geometric_horizons, offset_check, run_grouped,
    run_single_group, ConcentrationConfig, GroupedConfig, ParticleGroup,
};
use mfc_lab::measures::{EmpiricalMeasure, GaussianMixture, Measure};
use rand::{Rng, SeedableRng};

fn cloud(seed: u64, n: usize, spread: f64) -> EmpiricalMeasure {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    EmpiricalMeasure::from_1d((0..n).map(|_| rng.gen_range(-spread..spread)).collect()).unwrap()
}

#[test]
fn zero_horizon_gives_zero_distance() {
    for dim in [1, 2] {
        let cfg = ConcentrationConfig::gaussian_start(dim, 20, vec![0.0], 30, 4).unwrap();
        let t = run_single_group(&cfg).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].mean_w1.abs() < 1e-12, "d = {dim}: {:?}", t.rows[0]);
        let shift = common_noise_shift_check(&cfg, 0.5).unwrap();
        assert!(shift[0].with_noise.0.abs() < 1e-12 && shift[0].without_noise.0.abs() < 1e-12);
    }
}

#[test]
fn distance_decreases_with_n_and_grows_with_h() {
    let hs = geometric_horizons(0.5, 3);
    assert_eq!(hs, vec![0.125, 0.25, 0.5]);
    let small = run_single_group(&ConcentrationConfig::gaussian_start(1, 20, hs.clone(), 200, 1).unwrap()).unwrap();
    let large = run_single_group(&ConcentrationConfig::gaussian_start(1, 320, hs, 200, 1).unwrap()).unwrap();
    for (a, b) in small.rows.iter().zip(&large.rows) {
        assert!(b.mean_w1 < a.mean_w1);
    }
    for w in small.rows.windows(2) {
        assert!(w[1].mean_w1 > w[0].mean_w1 - 2.0 * w[1].stderr);
    }
}

#[test]
fn one_group_reproduces_the_single_group_run() {
    let mut cfg = ConcentrationConfig::gaussian_start(1, 40, vec![0.2], 50, 9).unwrap();
    cfg.drift = vec![0.7];
    let single = run_single_group(&cfg).unwrap().rows[0];
    let grouped = GroupedConfig {
        dim: 1,
        groups: vec![ParticleGroup { drift: cfg.drift.clone(), initial_points: cfg.initial_points.clone() }],
    };
    let rep = run_grouped(&grouped, 0.2, 50, 9).unwrap();
    assert!((rep.aggregate_mean - single.mean_w1).abs() < 1e-12);
    assert!((rep.weighted_sum - single.mean_w1).abs() < 1e-12);
}

#[test]
fn pooled_distance_is_below_the_weighted_group_distances() {
    for dim in [1, 2] {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(dim as u64);
        let groups = [(5, 1.0), (12, -0.5), (23, 0.0)]
            .iter()
            .map(|&(n, a)| ParticleGroup {
                drift: vec![a; dim],
                initial_points: EmpiricalMeasure::new(dim, (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .unwrap(),
            })
            .collect();
        let cfg = GroupedConfig { dim, groups };
        assert_eq!(cfg.total(), 40);
        let rep = run_grouped(&cfg, 0.3, 40, 2).unwrap();
        assert!(rep.max_excess <= 1e-12, "d = {dim}: {rep:?}");
        assert!(rep.aggregate_mean <= rep.weighted_sum + 1e-12);
    }
}

#[test]
fn shifted_start_costs_at_most_the_shift() {
    for (dim, shift, norm) in [(1, vec![-0.4], 0.4), (2, vec![0.3, -0.4], 0.5)] {
        let cfg = ConcentrationConfig::gaussian_start(dim, 30, vec![0.25], 40, 6).unwrap();
        let rep = offset_check(&cfg, 0.25, &shift).unwrap();
        assert!((rep.shift_norm - norm).abs() < 1e-15);
        assert!(rep.max_excess <= 1e-12, "{rep:?}");
        assert!(rep.max_pair_error <= 1e-12, "{rep:?}");
    }
}

#[test]
fn common_noise_translates_both_arguments() {
    for dim in [1, 2] {
        let cfg = ConcentrationConfig::gaussian_start(dim, 25, vec![0.1, 0.4], 40, 8).unwrap();
        for row in common_noise_shift_check(&cfg, 0.7).unwrap() {
            assert!(row.max_difference <= 1e-12, "d = {dim}: {row:?}");
            let (m1, s1) = row.with_noise;
            let (m0, s0) = row.without_noise;
            assert!((m1 - m0).abs() <= 4.0 * (s1 * s1 + s0 * s0).sqrt(), "{row:?}");
        }
        let none = common_noise_shift_check(&cfg, 0.0).unwrap();
        assert!(none.iter().all(|r| r.max_difference == 0.0));
    }
}

#[test]
fn sampling_a_point_mass_costs_nothing() {
    let m: Measure = GaussianMixture::normal(0.3, 0.0).unwrap().into();
    let rate = fournier_guillin(&m, &[1, 4, 16], 10, 2).unwrap();
    assert!(rate.points.iter().all(|p| p.value.abs() < 1e-12));
    assert!(rate.fit.is_none());
}

#[test]
fn gaussian_sampling_rate_is_inverse_square_root() {
    let m: Measure = GaussianMixture::normal(0.0, 1.0).unwrap().into();
    let rate = fournier_guillin(&m, &[16, 64, 256, 1024], 300, 12).unwrap();
    let fit = rate.fit.unwrap();
    assert!((-0.6..=-0.4).contains(&fit.slope), "{fit:?}");
    assert!(fit.ci_lo <= fit.slope && fit.slope <= fit.ci_hi);
    assert!((rate.second_moment - 1.0).abs() < 1e-9);
}

#[test]
fn sampling_rate_normalized_by_second_moment_is_scale_free() {
    let base = fournier_guillin(&GaussianMixture::normal(0.0, 1.0).unwrap().into(), &[8, 32, 128], 100, 5).unwrap();
    let wide = fournier_guillin(&GaussianMixture::normal(0.0, 4.0).unwrap().into(), &[8, 32, 128], 100, 5).unwrap();
    for (a, b) in base.points.iter().zip(&wide.points) {
        let na = a.value / base.second_moment.sqrt();
        let nb = b.value / wide.second_moment.sqrt();
        assert!((na / nb - 1.0).abs() < 1e-9, "{na} vs {nb}");
    }
}

#[test]
fn calibrated_bound_holds_across_sizes() {
    let hs = vec![0.5];
    let mut cases = Vec::new();
    for n in [16, 64, 256] {
        let cfg = ConcentrationConfig::gaussian_start(1, n, hs.clone(), 100, 3).unwrap();
        let t = run_single_group(&cfg).unwrap();
        cases.push((t.rows[0], t.second_moment));
    }
    let check = calibrated_bound_check(&cases, 0.5).unwrap();
    assert!(check.pass, "{check:?}");
    assert!((check.max_ratio - 1.0).abs() < 1.0);
}

#[test]
fn invalid_configurations_are_rejected() {
    assert!(ConcentrationConfig::gaussian_start(1, 10, vec![0.1], 29, 1).is_err());
    assert!(ConcentrationConfig::gaussian_start(3, 10, vec![0.1], 30, 1).is_err());
    assert!(ConcentrationConfig::gaussian_start(1, 10, vec![], 30, 1).is_err());
    assert!(ConcentrationConfig::gaussian_start(1, 10, vec![-0.1], 30, 1).is_err());
    assert!(ConcentrationConfig::gaussian_start(2, 2001, vec![0.1], 30, 1).is_err());
    let cfg = ConcentrationConfig::gaussian_start(1, 10, vec![0.1], 30, 1).unwrap();
    assert!(offset_check(&cfg, 0.1, &[0.1, 0.2]).is_err());
    assert!(common_noise_shift_check(&cfg, -1.0).is_err());
    let m: Measure = cloud(1, 10, 1.0).into();
    assert!(fournier_guillin(&m, &[1, 2, 4], 10, 1).is_err());
    let g: Measure = GaussianMixture::normal(0.0, 1.0).unwrap().into();
    assert!(fournier_guillin(&g, &[4, 2, 8], 10, 1).is_err());
    assert!(fournier_guillin(&g, &[2, 4], 10, 1).is_err());
}
