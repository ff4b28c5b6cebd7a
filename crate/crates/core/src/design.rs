//! Sequential-design scores over a fitted emulator.
//!
//! Two criteria rank candidate inputs for the next simulator run: ALM, the
//! predictive variance of the posterior mixture, favours points where the
//! emulator is least certain; EI, the expected improvement below the best
//! value seen so far, targets minimisation.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::mcmc::Chain;
use crate::posterior::Model;
use crate::predict::{pointwise_per_sample, Target};

/// Which score a candidate set was ranked by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Alm,
    Ei,
}

impl Criterion {
    pub fn from_flag(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alm" => Some(Criterion::Alm),
            "ei" => Some(Criterion::Ei),
            _ => None,
        }
    }
}

/// Closed-form expected improvement `E[max(f_min − Y, 0)]` for
/// `Y = μ + σ·T` with `T` standard Student-t on `dof` degrees of freedom.
pub fn student_t_ei(mu: f64, sigma: f64, dof: f64, f_min: f64) -> Result<f64> {
    if !(dof > 1.0) {
        return Err(Error::Undefined(format!("expected improvement needs dof > 1, got {dof}")));
    }
    if !(sigma >= 0.0) || !mu.is_finite() || !f_min.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "expected improvement needs finite μ, f_min and σ ≥ 0 (μ = {mu}, σ = {sigma})"
        )));
    }
    let gap = f_min - mu;
    if sigma == 0.0 {
        return Ok(gap.max(0.0));
    }
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let z = gap / sigma;
    let ei = gap * t.cdf(z) + sigma * (dof + z * z) / (dof - 1.0) * t.pdf(z);
    Ok(ei.max(0.0))
}

fn check_candidates(candidates: &DMatrix<f64>, model: &Model, chain: &Chain) -> Result<()> {
    if candidates.nrows() == 0 {
        return Err(Error::InsufficientData("empty candidate set".into()));
    }
    if candidates.ncols() != model.p() {
        return Err(Error::dim("candidates", model.p(), candidates.ncols()));
    }
    if chain.is_empty() {
        return Err(Error::InsufficientData("chain has no samples".into()));
    }
    Ok(())
}

/// Mixture predictive variance at every candidate: the average of the
/// per-sample Student-t variances plus the variance of the per-sample means.
pub fn alm_scores(candidates: &DMatrix<f64>, model: &Model, chain: &Chain, target: Target) -> Result<Vec<f64>> {
    check_candidates(candidates, model, chain)?;
    let per = pointwise_per_sample(candidates, model, chain, target)?;
    let dof = per[0].2;
    if !(dof > 2.0) {
        return Err(Error::Undefined(format!(
            "predictive variance is infinite for dof = {dof}"
        )));
    }
    let t = per.len() as f64;
    let factor = dof / (dof - 2.0);
    Ok((0..candidates.nrows())
        .into_par_iter()
        .map(|i| {
            let mean = per.iter().map(|(m, _, _)| m[i]).sum::<f64>() / t;
            let within = per.iter().map(|(_, s2, _)| s2[i] * factor).sum::<f64>() / t;
            let between = per.iter().map(|(m, _, _)| (m[i] - mean).powi(2)).sum::<f64>() / t;
            within + between
        })
        .collect())
}

/// ALM score of a single point.
pub fn alm_score(xstar: &[f64], model: &Model, chain: &Chain) -> Result<f64> {
    let x = DMatrix::from_row_slice(1, xstar.len(), xstar);
    Ok(alm_scores(&x, model, chain, Target::Response)?[0])
}

/// Chain-averaged Student-t expected improvement below `f_min` at every
/// candidate.
pub fn expected_improvements(
    candidates: &DMatrix<f64>,
    f_min: f64,
    model: &Model,
    chain: &Chain,
    target: Target,
) -> Result<Vec<f64>> {
    check_candidates(candidates, model, chain)?;
    let per = pointwise_per_sample(candidates, model, chain, target)?;
    let t = per.len() as f64;
    (0..candidates.nrows())
        .into_par_iter()
        .map(|i| {
            let mut total = 0.0;
            for (m, s2, dof) in &per {
                total += student_t_ei(m[i], s2[i].sqrt(), *dof, f_min)?;
            }
            Ok(total / t)
        })
        .collect()
}

/// Expected improvement of a single point.
pub fn expected_improvement(xstar: &[f64], f_min: f64, model: &Model, chain: &Chain) -> Result<f64> {
    let x = DMatrix::from_row_slice(1, xstar.len(), xstar);
    Ok(expected_improvements(&x, f_min, model, chain, Target::Response)?[0])
}

/// Candidates in descending score order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScores {
    /// Candidates reordered by rank.
    pub candidates: DMatrix<f64>,
    pub scores: Vec<f64>,
    /// Row of each ranked candidate in the original set.
    pub order: Vec<usize>,
    pub criterion: Criterion,
}

/// Sorts candidates by descending score; ties keep their original order.
pub fn rank_candidates(candidates: &DMatrix<f64>, scores: &[f64], criterion: Criterion) -> Result<CandidateScores> {
    if candidates.nrows() == 0 {
        return Err(Error::InsufficientData("empty candidate set".into()));
    }
    if scores.len() != candidates.nrows() {
        return Err(Error::dim("candidate scores", candidates.nrows(), scores.len()));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(Error::InvalidParameter(format!("score {s} is not a finite nonnegative value")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ok(CandidateScores {
        candidates: candidates.select_rows(order.iter()),
        scores: order.iter().map(|&i| scores[i]).collect(),
        order,
        criterion,
    })
}

/// Scores and ranks candidates under `criterion`. EI uses the smallest
/// training response as `f_min` unless one is given.
pub fn score_candidates(
    candidates: &DMatrix<f64>,
    criterion: Criterion,
    model: &Model,
    chain: &Chain,
    f_min: Option<f64>,
) -> Result<CandidateScores> {
    let scores = match criterion {
        Criterion::Alm => alm_scores(candidates, model, chain, Target::Response)?,
        Criterion::Ei => {
            let f = f_min.unwrap_or_else(|| model.y.min());
            expected_improvements(candidates, f, model, chain, Target::Response)?
        }
    };
    rank_candidates(candidates, &scores, criterion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{FamilyKind, KernelSpec, ETA_FLOOR};
    use crate::posterior::PriorSpec;
    use crate::predict::Fitted;
    use nalgebra::DVector;
    use proptest::prelude::*;

    #[test]
    fn ei_limits() {
        assert!(student_t_ei(10.0, 1e-9, 5.0, 0.0).unwrap() < 1e-12);
        assert!((student_t_ei(-2.5, 1e-9, 5.0, 0.0).unwrap() - 2.5).abs() < 1e-9);
        assert_eq!(student_t_ei(-2.5, 0.0, 5.0, 0.0).unwrap(), 2.5);
        assert!(student_t_ei(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ei_at_zero_matches_half_mean_abs() {
        // With μ = f_min the improvement is E[max(−σT, 0)] = σ·E|T|/2, and
        // E|T| = 2√ν Γ((ν+1)/2) / (√π (ν−1) Γ(ν/2)).
        let nu: f64 = 10.0;
        let lg = statrs::function::gamma::ln_gamma;
        let e_abs = 2.0 * nu.sqrt() * (lg((nu + 1.0) / 2.0) - lg(nu / 2.0)).exp()
            / (std::f64::consts::PI.sqrt() * (nu - 1.0));
        let ei = student_t_ei(0.0, 1.0, nu, 0.0).unwrap();
        assert!((ei - e_abs / 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn ei_monotone(mu in -3.0f64..3.0, d in 0.0f64..1.0, s in 0.05f64..3.0, ds in 0.0f64..1.0, nu in 1.5f64..40.0) {
            let base = student_t_ei(mu, s, nu, 0.0).unwrap();
            prop_assert!(student_t_ei(mu + d, s, nu, 0.0).unwrap() <= base + 1e-12);
            prop_assert!(student_t_ei(mu, s + ds, nu, 0.0).unwrap() >= base - 1e-12);
            prop_assert!(base >= 0.0);
        }

        #[test]
        fn ranking_argmax_affine_invariant(scores in proptest::collection::vec(0.0f64..5.0, 1..12), a in 0.1f64..10.0, b in 0.0f64..3.0) {
            let c = DMatrix::from_fn(scores.len(), 1, |i, _| i as f64);
            let r1 = rank_candidates(&c, &scores, Criterion::Alm).unwrap();
            let shifted: Vec<f64> = scores.iter().map(|s| a * s + b).collect();
            let r2 = rank_candidates(&c, &shifted, Criterion::Alm).unwrap();
            prop_assert_eq!(r1.order[0], r2.order[0]);
        }
    }

    #[test]
    fn ranking_is_stable() {
        let c = DMatrix::from_row_slice(4, 1, &[0.1, 0.2, 0.2, 0.3]);
        let r = rank_candidates(&c, &[1.0, 2.0, 2.0, 0.5], Criterion::Ei).unwrap();
        assert_eq!(r.order, vec![1, 2, 0, 3]);
        assert_eq!(r.scores, vec![2.0, 2.0, 1.0, 0.5]);
        let one = rank_candidates(&DMatrix::from_row_slice(1, 1, &[0.4]), &[0.0], Criterion::Alm).unwrap();
        assert_eq!(one.order, vec![0]);
        assert!(rank_candidates(&DMatrix::zeros(0, 1), &[], Criterion::Alm).is_err());
    }

    fn fixture() -> Model {
        let x = DMatrix::from_row_slice(6, 2, &[0.0, 0.1, 0.1, 0.3, 0.2, 0.2, 0.3, 0.0, 0.25, 0.15, 0.05, 0.05]);
        let y = DVector::from_vec(vec![0.1, 0.5, 0.3, -0.2, 0.2, 0.0]);
        Model::new(x, y, PriorSpec::default()).unwrap()
    }

    #[test]
    fn single_sample_alm_is_t_variance() {
        let model = fixture();
        let spec = KernelSpec::sim(vec![1.5, -0.7], 0.05).unwrap();
        let chain = Chain::from_samples(FamilyKind::Sim, 2, vec![spec.clone()], vec![0.0]).unwrap();
        let xs = [0.6, 0.9];
        let f = Fitted::from_model(&model, &spec).unwrap();
        let (_, s2) = f.pointwise(&DMatrix::from_row_slice(1, 2, &xs), Target::Response).unwrap();
        let dof = f.dof();
        let want = s2[0] * dof / (dof - 2.0);
        assert!((alm_score(&xs, &model, &chain).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn alm_sign_invariant_and_training_point() {
        let model = fixture();
        let a = KernelSpec::sim(vec![1.5, -0.7], ETA_FLOOR).unwrap();
        let b = KernelSpec::sim(vec![-1.5, 0.7], ETA_FLOOR).unwrap();
        let ca = Chain::from_samples(FamilyKind::Sim, 2, vec![a], vec![0.0]).unwrap();
        let cb = Chain::from_samples(FamilyKind::Sim, 2, vec![b], vec![0.0]).unwrap();
        let cands = DMatrix::from_row_slice(3, 2, &[0.9, 0.9, 0.1, 0.3, 0.5, 0.0]);
        let sa = alm_scores(&cands, &model, &ca, Target::Response).unwrap();
        let sb = alm_scores(&cands, &model, &cb, Target::Response).unwrap();
        for (u, v) in sa.iter().zip(&sb) {
            assert!((u - v).abs() < 1e-12 * u.max(1.0));
        }
        // The second candidate is a training row: the prediction
        // interpolates and only noise-floor variance remains.
        assert!(sa[1] < sa[0]);
        assert!(sa[1] < 3.0 * ETA_FLOOR * (1.0 + model.y.norm_squared()));
    }
}
