//! Student-t kriging: a pointwise law, joint sample paths along a line
//! through the input cube, and the posterior mixture plotted against the
//! fitted index.
//!
//! cargo run --release --example predict_paths

use gpsim::experiments::{gen_sinusoid, sinusoid_link, SINUSOID_BETA};
use gpsim::kernels::FamilyKind;
use gpsim::mcmc::{run_chain, McmcConfig};
use gpsim::posterior::{Model, PriorSpec};
use gpsim::predict::{joint_predictive, mixture_predict, predictive, sample_paths};
use gpsim::rng;
use nalgebra::DMatrix;

fn main() -> gpsim::Result<()> {
    let data = gen_sinusoid(45, &mut rng::seeded(3));
    let model = Model::new(data.x.clone(), data.y.clone(), PriorSpec::default())?;
    let chain = run_chain(&model, FamilyKind::Sim, &McmcConfig::default())?;

    // One posterior sample, one point.
    let spec = chain.samples.last().expect("non-empty chain");
    let centre = [0.5; 4];
    let law = predictive(&centre, &data.y, &data.x, spec, &model.priors)?;
    println!(
        "at the cube centre: mean {:.4}, scale {:.4}, dof {}",
        law.mean[0],
        law.scale[(0, 0)].sqrt(),
        law.dof
    );

    // Joint paths along the diagonal of the cube.
    let m = 25;
    let line = DMatrix::from_fn(m, 4, |i, _| i as f64 / (m - 1) as f64);
    let joint = joint_predictive(&line, &data.y, &data.x, spec, &model.priors)?;
    let paths = sample_paths(&joint, 3, &mut rng::seeded(4))?;
    println!("\n   t     truth   path 1   path 2   path 3");
    let s: f64 = SINUSOID_BETA.iter().sum();
    for i in (0..m).step_by(4) {
        let t = i as f64 / (m - 1) as f64;
        println!(
            "{t:5.2} {:9.4} {:8.4} {:8.4} {:8.4}",
            sinusoid_link(t * s),
            paths[(0, i)],
            paths[(1, i)],
            paths[(2, i)]
        );
    }

    // Mixture over the chain, sorted by posterior mean index.
    let test = gen_sinusoid(12, &mut rng::seeded(5));
    let pred = mixture_predict(&test.x, &model, &chain, &[0.05, 0.95], 6)?;
    let idx = pred.mean_index.clone().expect("SIM chain");
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by(|a, b| idx[*a].total_cmp(&idx[*b]));
    println!("\n  index     mean       5%      95%    truth");
    for i in order {
        println!(
            "{:7.3} {:8.4} {:8.4} {:8.4} {:8.4}",
            idx[i],
            pred.mean[i],
            pred.quantiles[i][0],
            pred.quantiles[i][1],
            test.truth.as_ref().unwrap()[i]
        );
    }
    Ok(())
}
