use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hellinger_core::harness::{estimate_error, ExperimentConfig};
use hellinger_core::parallel::Execution;
use hellinger_core::reproduce::shifted_uniforms;
use hellinger_core::synth::random_sparse_distribution;
use hellinger_core::{
    baraud_expected_statistic, bhattacharyya, critical_radius, geodesic_angle, geodesic_fraction,
    hellinger_midpoint, hellinger_sq, midpoint_expected_statistic, BinnedDistribution, DivergenceReport,
    RobustTest, TestFamily, TestSpec,
};

/// Two distributions on the same `k` points, some atoms possibly empty.
fn pair() -> impl Strategy<Value = (BinnedDistribution, BinnedDistribution)> {
    (1usize..24, any::<u64>()).prop_map(|(k, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (
            random_sparse_distribution(&mut rng, k, 0.7, 0.3),
            random_sparse_distribution(&mut rng, k, 0.7, 0.3),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn divergences_are_symmetric_and_bounded((a, b) in pair()) {
        let ab = DivergenceReport::compute(&a, &b).unwrap();
        let ba = DivergenceReport::compute(&b, &a).unwrap();
        prop_assert!((ab.hellinger_sq - ba.hellinger_sq).abs() <= 1e-15);
        prop_assert!((ab.tv - ba.tv).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&ab.hellinger_sq));
        prop_assert!((0.0..=2.0).contains(&ab.sym_chi_sq));
        prop_assert!((ab.hellinger_sq - (1.0 - ab.bhattacharyya)).abs() <= 1e-12);
        prop_assert!(0.5 * ab.tv * ab.tv <= ab.hellinger_sq + 1e-12);
        prop_assert!(ab.hellinger_sq <= ab.tv + 1e-12);
        prop_assert!(0.25 * ab.sym_chi_sq <= ab.hellinger_sq + 1e-12);
        prop_assert!(ab.hellinger_sq <= 0.5 * ab.sym_chi_sq + 1e-12);
    }

    #[test]
    fn midpoint_is_equidistant_at_the_critical_radius((a, b) in pair()) {
        prop_assume!(hellinger_sq(&a, &b).unwrap() > 1e-9);
        let u = hellinger_midpoint(&a, &b).unwrap();
        let r = critical_radius(&a, &b).unwrap();
        prop_assert!((hellinger_sq(&a, &u).unwrap() - r.radius).abs() <= 1e-10);
        prop_assert!((hellinger_sq(&b, &u).unwrap() - r.radius).abs() <= 1e-10);
        prop_assert!((bhattacharyya(&a, &u).unwrap() - (r.theta / 2.0).cos()).abs() <= 1e-10);
    }

    #[test]
    fn geodesic_angles_add_up((a, b) in pair(), t in 0.0f64..=1.0) {
        prop_assume!(hellinger_sq(&a, &b).unwrap() > 1e-6);
        let theta = geodesic_angle(&a, &b).unwrap();
        let q = geodesic_fraction(&a, &b, t).unwrap().distribution;
        let left = geodesic_angle(&a, &q).unwrap();
        let right = geodesic_angle(&q, &b).unwrap();
        prop_assert!((left + right - theta).abs() <= 1e-6, "{left} + {right} vs {theta}");
    }

    #[test]
    fn expected_statistics_flip_with_the_hypotheses((a, b) in pair(), seed in any::<u64>()) {
        prop_assume!(hellinger_sq(&a, &b).unwrap() > 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_sparse_distribution(&mut rng, a.len(), 1.0, 0.2);
        let forward = baraud_expected_statistic(&p, &a, &b).unwrap();
        let backward = baraud_expected_statistic(&p, &b, &a).unwrap();
        prop_assert!((forward + backward).abs() <= 1e-12);
        let forward = midpoint_expected_statistic(&p, &a, &b).unwrap();
        let backward = midpoint_expected_statistic(&p, &b, &a).unwrap();
        prop_assert!((forward + backward).abs() <= 1e-12);
    }

    #[test]
    fn baraud_decisions_flip_with_the_hypotheses((a, b) in pair(), seed in any::<u64>()) {
        prop_assume!(hellinger_sq(&a, &b).unwrap() > 1e-9);
        let batch = a.sample(25, seed);
        let forward = TestSpec::new(TestFamily::Baraud, a.clone(), b.clone()).unwrap().prepare().unwrap();
        let backward = TestSpec::new(TestFamily::Baraud, b, a).unwrap().prepare().unwrap();
        let x = forward.decide(&batch.atom_indices);
        let y = backward.decide(&batch.atom_indices);
        prop_assert!((x.statistic_value + y.statistic_value).abs() <= 1e-12);
        if x.statistic_value.abs() > 1e-12 {
            prop_assert_eq!(x.verdict, y.verdict.flipped());
        }
    }
}

#[test]
fn estimates_are_deterministic_and_schedule_independent() {
    let [far, near, truth] = shifted_uniforms(0.01).unwrap();
    let config = ExperimentConfig::new(TestFamily::MaximumLikelihood, far, near, 50, 2_000, 11)
        .with_truths(vec![truth]);
    let a = estimate_error(&config).unwrap();
    let b = estimate_error(&config).unwrap();
    let c = estimate_error(&config.clone().with_execution(Execution::Serial)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn interval_covers_the_exact_error_in_most_runs() {
    let eps = 0.01;
    let m = 50;
    let exact = 1.0 - (1.0f64 - eps).powi(m as i32);
    let [far, near, truth] = shifted_uniforms(eps).unwrap();
    let runs = 1000;
    let covered = (0..runs)
        .filter(|&seed| {
            let config = ExperimentConfig::new(TestFamily::MaximumLikelihood, far.clone(), near.clone(), m, 1_000, seed)
                .with_truths(vec![truth.clone()]);
            let e = estimate_error(&config).unwrap();
            e.ci_low <= exact && exact <= e.ci_high
        })
        .count();
    // the coverage rate should be at least 95%; allow three standard errors of run-to-run noise
    let rate = covered as f64 / runs as f64;
    let se = (0.95 * 0.05 / runs as f64).sqrt();
    println!("coverage {covered}/{runs}");
    assert!(rate >= 0.95 - 3.0 * se, "{covered}/{runs}");
}
