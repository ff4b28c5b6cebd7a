//! Fit a GP-SIM to noisy data from a periodic single-index function and
//! look at what the chain says about the index direction.
//!
//! cargo run --release --example fit_sinusoid [-- n_train seed]

use gpsim::experiments::{gen_sinusoid, SINUSOID_BETA};
use gpsim::kernels::FamilyKind;
use gpsim::mcmc::{effective_sample_size, run_chain, McmcConfig};
use gpsim::posterior::{Model, PriorSpec};
use gpsim::postprocess::{axis_angle, implied_theta, point_estimate};
use gpsim::rng;

fn main() -> gpsim::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(45);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let data = gen_sinusoid(n, &mut rng::seeded(seed));
    let model = Model::new(data.x, data.y, PriorSpec::default())?;
    let config = McmcConfig { seed, ..McmcConfig::default() };
    let chain = run_chain(&model, FamilyKind::Sim, &config)?;

    println!("{} stored samples", chain.len());
    println!("acceptance: eta {:.3}, beta {:.3}", chain.accept_eta, chain.accept_main);

    let est = point_estimate(&chain)?;
    let truth = SINUSOID_BETA;
    let norm = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    println!("\n  j   estimate   truth/‖truth‖   P(beta_j > 0)");
    let pos = chain.positive_fraction()?;
    for j in 0..est.len() {
        println!("{:>3} {:>10.4} {:>15.4} {:>15.3}", j + 1, est[j], truth[j] / norm, pos[j]);
    }
    println!("angle to truth: {:.4} rad", axis_angle(&est, &truth));

    let theta = implied_theta(&chain)?;
    let mut sorted = theta.clone();
    sorted.sort_by(f64::total_cmp);
    println!(
        "implied length-scale 1/‖β‖²: median {:.4}, 90% interval [{:.4}, {:.4}]",
        sorted[sorted.len() / 2],
        sorted[sorted.len() / 20],
        sorted[sorted.len() * 19 / 20]
    );
    for j in 0..chain.dim {
        println!("ESS(beta_{}) = {:.1}", j + 1, effective_sample_size(&chain.param_trace(j)));
    }
    Ok(())
}
