//! A short pilot chain tunes the β proposal; the second chain mixes
//! faster at the same length.
//!
//! cargo run --release --example adapt_proposal

use gpsim::experiments::gen_sinusoid;
use gpsim::kernels::FamilyKind;
use gpsim::mcmc::{adapt_proposal, effective_sample_size, run_chain, McmcConfig};
use gpsim::posterior::{Model, PriorSpec};
use gpsim::rng;

fn main() -> gpsim::Result<()> {
    let data = gen_sinusoid(45, &mut rng::seeded(21));
    let model = Model::new(data.x, data.y, PriorSpec::default())?;
    let base = McmcConfig { thin: 1, ..McmcConfig::default() };

    let pilot = run_chain(&model, FamilyKind::Sim, &base)?;
    let adapted = adapt_proposal(&pilot)?;
    println!("adapted proposal covariance:\n{:.4}", adapted.cov);

    let p = adapted.cov.nrows();
    let tuned = McmcConfig {
        sigma_beta: Some((0..p).map(|i| (0..p).map(|j| adapted.cov[(i, j)]).collect()).collect()),
        seed: 2,
        ..base
    };
    let second = run_chain(&model, FamilyKind::Sim, &tuned)?;
    println!("beta acceptance: pilot {:.3}, adapted {:.3}", pilot.accept_main, second.accept_main);
    for j in 0..p {
        let a = effective_sample_size(&pilot.param_trace(j));
        let b = effective_sample_size(&second.param_trace(j));
        println!("ESS(beta_{}): pilot {a:7.1}  adapted {b:7.1}  ratio {:.1}", j + 1, b / a);
    }
    Ok(())
}
