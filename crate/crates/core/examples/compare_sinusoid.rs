//! Monte Carlo comparison of SIM, separable and isotropic GPs on the
//! sinusoid problem, scored by √Mahalanobis on fresh test sets.
//!
//! cargo run --release --example compare_sinusoid [-- n_reps]

use gpsim::experiments::{monte_carlo_compare, ExperimentConfig};

fn main() -> gpsim::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let config = ExperimentConfig { n_reps: reps, ..ExperimentConfig::default() };
    let summary = monte_carlo_compare(&config)?;
    print!("{}", summary.table());
    if let Some(w) = summary.win_rate("sim", "sep") {
        println!("sim beats sep in {:.0}% of replicates", 100.0 * w);
    }
    Ok(())
}
