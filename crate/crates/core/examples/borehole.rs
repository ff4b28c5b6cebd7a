//! The borehole function is far from a single-index model. After dropping
//! the three inputs whose coefficients straddle zero, compare the three GP
//! families on Latin hypercube designs.
//!
//! cargo run --release --example borehole [-- n_reps]

use gpsim::experiments::{
    borehole, gen_borehole, monte_carlo_compare, ExperimentConfig, Generator, RangeCheck, BOREHOLE_BOUNDS,
};
use gpsim::rng;

fn main() -> gpsim::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let mid: Vec<f64> = BOREHOLE_BOUNDS.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    println!("flow at the centre of the input box: {:.4}", borehole(&mid, RangeCheck::Strict)?);

    let d = gen_borehole(5, &[], &mut rng::seeded(1))?;
    println!("a 5-run Latin hypercube, unit-cube inputs:\n{:.3}", d.x);

    let config = ExperimentConfig {
        generator: Generator::Borehole {
            drop_columns: vec!["r".into(), "T_u".into(), "T_l".into()],
        },
        n_train: 150,
        n_test: 400,
        n_reps: reps,
        pilot_iters: Some(2000),
        ..ExperimentConfig::default()
    };
    let summary = monte_carlo_compare(&config)?;
    print!("{}", summary.table());
    Ok(())
}
