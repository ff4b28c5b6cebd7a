//! Rank candidate inputs for the next simulator run by predictive variance
//! (ALM) and by expected improvement below the best response so far (EI).
//!
//! cargo run --release --example sequential_design

use gpsim::design::{score_candidates, Criterion};
use gpsim::experiments::{gen_sinusoid, latin_hypercube};
use gpsim::kernels::FamilyKind;
use gpsim::mcmc::{run_chain, McmcConfig};
use gpsim::posterior::{Model, PriorSpec};
use gpsim::rng;

fn main() -> gpsim::Result<()> {
    let data = gen_sinusoid(30, &mut rng::seeded(9));
    let model = Model::new(data.x, data.y, PriorSpec::default())?;
    let chain = run_chain(&model, FamilyKind::Sim, &McmcConfig::default())?.subsample(200);
    let candidates = latin_hypercube(100, 4, &mut rng::seeded(10));

    for criterion in [Criterion::Alm, Criterion::Ei] {
        let ranked = score_candidates(&candidates, criterion, &model, &chain, None)?;
        println!("top candidates by {criterion:?}:");
        for r in 0..5 {
            let x: Vec<String> = ranked.candidates.row(r).iter().map(|v| format!("{v:.3}")).collect();
            println!("  #{} [{}] score {:.5}", r + 1, x.join(", "), ranked.scores[r]);
        }
    }
    println!("best training response: {:.4}", model.y.min());
    Ok(())
}
