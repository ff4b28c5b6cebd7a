//! Inverted cross-validation: fit on one small fold at a time and score on
//! the rest, which stresses each model's ability to generalise from few
//! runs.
//!
//! cargo run --release --example inverted_cv [-- k]

use gpsim::experiments::{gen_sinusoid, inverted_cv, ExperimentConfig};
use gpsim::kernels::FamilyKind;
use gpsim::mcmc::McmcConfig;
use gpsim::rng;

fn main() -> gpsim::Result<()> {
    let k: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let data = gen_sinusoid(150, &mut rng::seeded(12));
    let config = ExperimentConfig {
        n_reps: 1,
        methods: vec![FamilyKind::Sim, FamilyKind::Isotropic],
        mcmc: McmcConfig { n_iter: 2000, burn_in: 500, ..McmcConfig::default() },
        predict_samples: Some(100),
        ..ExperimentConfig::default()
    };
    let summary = inverted_cv(&data, k, &config)?;
    print!("{}", summary.table());
    for m in &summary.methods {
        println!("variance of {m}: {:.3}", summary.variance_of(m).unwrap_or(f64::NAN));
    }
    Ok(())
}
