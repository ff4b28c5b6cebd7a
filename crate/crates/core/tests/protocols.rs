//! Comparison protocols run end to end at small scale.

use gpsim::experiments::{gen_sinusoid, inverted_cv, monte_carlo_compare, ExperimentConfig};
use gpsim::kernels::FamilyKind;
use gpsim::mcmc::McmcConfig;
use gpsim::rng;

fn short(methods: Vec<FamilyKind>) -> ExperimentConfig {
    ExperimentConfig {
        n_train: 20,
        n_test: 30,
        n_reps: 3,
        methods,
        mcmc: McmcConfig {
            n_iter: 600,
            burn_in: 200,
            ..McmcConfig::default()
        },
        predict_samples: Some(50),
        ..ExperimentConfig::default()
    }
}

#[test]
fn inverted_cv_sim_spread_below_iso() {
    let data = gen_sinusoid(450, &mut rng::seeded(2012));
    let config = ExperimentConfig {
        n_reps: 1,
        mcmc: McmcConfig {
            n_iter: 2000,
            burn_in: 500,
            ..McmcConfig::default()
        },
        predict_samples: Some(100),
        ..short(vec![FamilyKind::Sim, FamilyKind::Isotropic])
    };
    let summary = inverted_cv(&data, 10, &config).unwrap();
    assert_eq!(summary.distances_of("sim").unwrap().len(), 10);
    let sim = summary.variance_of("sim").unwrap();
    let iso = summary.variance_of("iso").unwrap();
    assert!(sim < iso, "variance sim {sim} vs iso {iso}");
}

#[test]
fn monte_carlo_is_seed_deterministic_and_thread_independent() {
    let config = short(vec![FamilyKind::Sim, FamilyKind::Separable]);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = one.install(|| monte_carlo_compare(&config)).unwrap();
    let b = three.install(|| monte_carlo_compare(&config)).unwrap();
    assert_eq!(a.distances, b.distances);

    let other = ExperimentConfig { seed: 99, ..config };
    let c = monte_carlo_compare(&other).unwrap();
    assert_ne!(a.distances, c.distances);
}

#[test]
fn every_replicate_reports_a_finite_distance() {
    let summary = monte_carlo_compare(&short(vec![FamilyKind::Isotropic])).unwrap();
    let d = summary.distances_of("iso").unwrap();
    assert_eq!(d.len(), 3);
    assert!(d.iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(summary.failures.iter().all(|f| f.is_empty()));
}
