//! Metropolis-within-Gibbs sampling of kernel parameters.
//!
//! Each sweep updates the nugget with `β` (or `θ`) held fixed, then the
//! correlation parameters with the nugget held fixed. Because σ² is
//! integrated out, the chain lives on `p + 1` parameters only.
//!
//! - SIM: `β` moves as one block under a Gaussian random walk.
//! - Separable: each `θₖ` gets its own sliding-window update.
//! - Isotropic: the shared `θ` gets a sliding-window update.
//!
//! Proposals that make the correlation matrix singular are rejected rather
//! than aborting the run.

pub mod diagnostics;
pub mod orthant;
pub mod proposal;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{FamilyKind, KernelSpec, ETA_FLOOR};
use crate::posterior::{rows_to_matrix, Model};
use crate::postprocess;
use crate::rng;

pub use diagnostics::effective_sample_size;
pub use orthant::{orthant_probability, orthant_probability_mc, OrthantTable};
pub use proposal::{propose_beta, propose_eta, BetaProposal};

/// Inflation applied to the pilot covariance in [`adapt_proposal`].
pub const ADAPT_INFLATION: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Proposal covariance for `β`; `diag(0.2)` when absent.
    pub sigma_beta: Option<Vec<Vec<f64>>>,
    pub sign_flips: bool,
    pub seed: u64,
    /// Starting `β`; every component 1/2 when absent.
    pub beta_init: Option<Vec<f64>>,
    /// Starting length-scale for separable and isotropic chains.
    pub theta_init: f64,
    pub eta_init: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            n_iter: 5000,
            burn_in: 1000,
            thin: 2,
            sigma_beta: None,
            sign_flips: false,
            seed: 1,
            beta_init: None,
            theta_init: 0.5,
            eta_init: 0.1,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::InvalidParameter("n_iter must be positive".into()));
        }
        if self.burn_in >= self.n_iter {
            return Err(Error::InvalidParameter(format!(
                "burn_in {} must be below n_iter {}",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be positive".into()));
        }
        if !(self.eta_init >= ETA_FLOOR) {
            return Err(Error::InvalidParameter(format!(
                "eta_init {} is below the nugget floor",
                self.eta_init
            )));
        }
        if !(self.theta_init > 0.0) {
            return Err(Error::InvalidParameter("theta_init must be positive".into()));
        }
        if let Some(b) = &self.beta_init {
            if b.len() != p {
                return Err(Error::dim("beta_init", p, b.len()));
            }
        }
        if let Some(s) = &self.sigma_beta {
            if s.len() != p || s.iter().any(|r| r.len() != p) {
                return Err(Error::dim("sigma_beta", p, s.len()));
            }
        }
        Ok(())
    }

    pub fn sigma_beta_matrix(&self, p: usize) -> DMatrix<f64> {
        match &self.sigma_beta {
            Some(rows) => rows_to_matrix(rows),
            None => BetaProposal::default_cov(p),
        }
    }

    /// Number of samples a run keeps: `⌊(n_iter − burn_in) / thin⌋`.
    pub fn stored_samples(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    pub fn initial_spec(&self, kind: FamilyKind, p: usize) -> KernelSpec {
        let eta = self.eta_init;
        match kind {
            FamilyKind::Sim => KernelSpec {
                family: crate::kernels::Family::Sim {
                    beta: self.beta_init.clone().unwrap_or_else(|| vec![0.5; p]),
                },
                eta,
            },
            FamilyKind::Separable => KernelSpec {
                family: crate::kernels::Family::Separable {
                    theta: vec![self.theta_init; p],
                },
                eta,
            },
            FamilyKind::Isotropic => KernelSpec {
                family: crate::kernels::Family::Isotropic {
                    theta: self.theta_init,
                },
                eta,
            },
        }
    }
}

/// Current point of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub spec: KernelSpec,
    pub log_post: f64,
}

/// Which sub-steps of one sweep were accepted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepOutcome {
    pub eta_accepted: bool,
    pub main_accepted: usize,
    pub main_attempts: usize,
}

/// Metropolis–Hastings acceptance: true with probability `min(1, exp(log_ratio))`.
///
/// NaN and `-∞` ratios are always rejected.
pub fn metropolis_accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio.is_nan() || log_ratio == f64::NEG_INFINITY {
        return false;
    }
    if log_ratio >= 0.0 {
        return true;
    }
    rng.random::<f64>().ln() < log_ratio
}

/// Proposal machinery for one model and family.
#[derive(Debug, Clone)]
pub struct Sampler<'m> {
    model: &'m Model,
    kind: FamilyKind,
    beta: Option<BetaProposal>,
}

impl<'m> Sampler<'m> {
    pub fn new(model: &'m Model, kind: FamilyKind, config: &McmcConfig) -> Result<Self> {
        let p = model.p();
        config.validate(p)?;
        let beta = match kind {
            FamilyKind::Sim => Some(BetaProposal::new(
                config.sigma_beta_matrix(p),
                config.sign_flips,
            )?),
            _ => None,
        };
        Ok(Sampler { model, kind, beta })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    /// Log posterior, `-∞` below the nugget floor or on numerical failure.
    pub fn log_target(&self, spec: &KernelSpec) -> f64 {
        if !(spec.eta >= ETA_FLOOR) {
            return f64::NEG_INFINITY;
        }
        match self.model.log_posterior(spec) {
            Ok(v) if v.total.is_finite() => v.total,
            Ok(_) => f64::NEG_INFINITY,
            Err(e) => {
                log::debug!("rejecting proposal {spec}: {e}");
                f64::NEG_INFINITY
            }
        }
    }

    pub fn initial_state(&self, config: &McmcConfig) -> Result<State> {
        let spec = config.initial_spec(self.kind, self.model.p());
        spec.validate()?;
        let log_post = self.log_target(&spec);
        if !log_post.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "initial state {spec} has zero posterior density"
            )));
        }
        Ok(State { spec, log_post })
    }

    fn try_move<R: Rng + ?Sized>(
        &self,
        state: &mut State,
        candidate: KernelSpec,
        log_q: f64,
        rng: &mut R,
    ) -> bool {
        let lp = self.log_target(&candidate);
        if metropolis_accept(lp - state.log_post + log_q, rng) {
            state.spec = candidate;
            state.log_post = lp;
            true
        } else {
            false
        }
    }

    /// Sliding-window update of the nugget alone.
    pub fn update_eta<R: Rng + ?Sized>(&self, state: &mut State, rng: &mut R) -> bool {
        let (eta, log_q) = propose_eta(state.spec.eta, rng);
        let cand = KernelSpec {
            family: state.spec.family.clone(),
            eta,
        };
        self.try_move(state, cand, log_q, rng)
    }

    /// One sweep: nugget first, then the correlation parameters.
    pub fn step<R: Rng + ?Sized>(&self, state: &mut State, rng: &mut R) -> StepOutcome {
        let mut out = StepOutcome {
            eta_accepted: self.update_eta(state, rng),
            ..StepOutcome::default()
        };

        let params = state.spec.params();
        match self.kind {
            FamilyKind::Sim => {
                let prop = self.beta.as_ref().expect("SIM sampler has a beta proposal");
                out.main_attempts = 1;
                match prop.propose(&params, rng) {
                    Ok((beta, log_q)) => {
                        let cand = state.spec.with_params(beta, state.spec.eta);
                        if self.try_move(state, cand, log_q, rng) {
                            out.main_accepted = 1;
                        }
                    }
                    Err(e) => log::warn!("beta proposal rejected: {e}"),
                }
            }
            FamilyKind::Separable | FamilyKind::Isotropic => {
                for k in 0..params.len() {
                    let mut theta = state.spec.params();
                    let (t, log_q) = propose_eta(theta[k], rng);
                    theta[k] = t;
                    out.main_attempts += 1;
                    let cand = state.spec.with_params(theta, state.spec.eta);
                    if self.try_move(state, cand, log_q, rng) {
                        out.main_accepted += 1;
                    }
                }
            }
        }
        out
    }
}

/// One Metropolis-within-Gibbs sweep of `state` under `sampler`.
pub fn mh_step<R: Rng + ?Sized>(state: &mut State, sampler: &Sampler<'_>, rng: &mut R) -> StepOutcome {
    sampler.step(state, rng)
}

/// Stored posterior samples of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub kind: FamilyKind,
    pub dim: usize,
    /// 1-based sweep number of each stored sample.
    pub iters: Vec<usize>,
    pub samples: Vec<KernelSpec>,
    pub log_post: Vec<f64>,
    pub accept_eta: f64,
    /// Acceptance rate of the β (or θ) updates.
    pub accept_main: f64,
}

impl Chain {
    /// A chain assembled from explicit samples, e.g. read back from disk.
    pub fn from_samples(
        kind: FamilyKind,
        dim: usize,
        samples: Vec<KernelSpec>,
        log_post: Vec<f64>,
    ) -> Result<Self> {
        if log_post.len() != samples.len() {
            return Err(Error::dim("chain log posterior trace", samples.len(), log_post.len()));
        }
        for s in &samples {
            if s.kind() != kind {
                return Err(Error::InvalidParameter("mixed kernel families in chain".into()));
            }
            if let Some(d) = s.dim() {
                if d != dim {
                    return Err(Error::dim("chain sample", dim, d));
                }
            }
        }
        Ok(Chain {
            kind,
            dim,
            iters: (1..=samples.len()).collect(),
            samples,
            log_post,
            accept_eta: f64::NAN,
            accept_main: f64::NAN,
        })
    }

    /// A SIM chain from raw index vectors with a common nugget.
    pub fn from_betas(betas: &[Vec<f64>], eta: f64) -> Result<Self> {
        let dim = betas.first().map_or(0, |b| b.len());
        let samples = betas
            .iter()
            .map(|b| KernelSpec::sim(b.clone(), eta))
            .collect::<Result<Vec<_>>>()?;
        let n = samples.len();
        Chain::from_samples(FamilyKind::Sim, dim, samples, vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// At most `max` samples, evenly spaced and always including the last.
    pub fn subsample(&self, max: usize) -> Chain {
        let t = self.len();
        if max == 0 || t <= max {
            return self.clone();
        }
        let idx: Vec<usize> = (0..max).map(|k| ((k + 1) * t) / max - 1).collect();
        Chain {
            kind: self.kind,
            dim: self.dim,
            iters: idx.iter().map(|&i| self.iters[i]).collect(),
            samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
            log_post: idx.iter().map(|&i| self.log_post[i]).collect(),
            accept_eta: self.accept_eta,
            accept_main: self.accept_main,
        }
    }

    pub fn etas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.eta).collect()
    }

    /// Index vectors of a SIM chain.
    pub fn betas(&self) -> Result<Vec<Vec<f64>>> {
        if self.kind != FamilyKind::Sim {
            return Err(Error::InvalidParameter(format!(
                "a {} chain has no index vectors",
                self.kind
            )));
        }
        Ok(self.samples.iter().map(|s| s.params()).collect())
    }

    /// Trace of parameter component `j`.
    pub fn param_trace(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.params()[j]).collect()
    }

    /// Fraction of samples with `βⱼ > 0`, per component. Values near ½ flag
    /// inputs whose coefficient straddles zero.
    pub fn positive_fraction(&self) -> Result<Vec<f64>> {
        let betas = self.betas()?;
        let t = betas.len().max(1) as f64;
        Ok((0..self.dim)
            .map(|j| betas.iter().filter(|b| b[j] > 0.0).count() as f64 / t)
            .collect())
    }
}

/// Runs a chain of `config.n_iter` sweeps and keeps every `thin`-th sample
/// after burn-in. Deterministic given `config.seed`.
pub fn run_chain(model: &Model, kind: FamilyKind, config: &McmcConfig) -> Result<Chain> {
    let sampler = Sampler::new(model, kind, config)?;
    let mut state = sampler.initial_state(config)?;
    let mut rng = rng::seeded(config.seed);
    let keep = config.stored_samples();
    let mut chain = Chain {
        kind,
        dim: model.p(),
        iters: Vec::with_capacity(keep),
        samples: Vec::with_capacity(keep),
        log_post: Vec::with_capacity(keep),
        accept_eta: 0.0,
        accept_main: 0.0,
    };
    let (mut eta_acc, mut main_acc, mut main_att) = (0usize, 0usize, 0usize);
    for it in 1..=config.n_iter {
        let out = sampler.step(&mut state, &mut rng);
        eta_acc += usize::from(out.eta_accepted);
        main_acc += out.main_accepted;
        main_att += out.main_attempts;
        if it > config.burn_in && (it - config.burn_in) % config.thin == 0 {
            chain.iters.push(it);
            chain.samples.push(state.spec.clone());
            chain.log_post.push(state.log_post);
        }
    }
    chain.accept_eta = eta_acc as f64 / config.n_iter as f64;
    chain.accept_main = if main_att > 0 {
        main_acc as f64 / main_att as f64
    } else {
        0.0
    };
    Ok(chain)
}

/// Proposal covariance learned from a pilot chain.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedProposal {
    pub cov: DMatrix<f64>,
    /// True when the sample covariance was degenerate and `diag(0.2)` was
    /// returned instead.
    pub fell_back: bool,
}

/// Sample covariance of sign-reconciled `β` draws, inflated by
/// [`ADAPT_INFLATION`] and floored to be positive definite.
///
/// Signs are reconciled by the mean index at the unit-cube center before the
/// covariance is taken; otherwise mode switching would dominate it.
pub fn adapt_proposal(chain: &Chain) -> Result<AdaptedProposal> {
    let p = chain.dim;
    if chain.len() < p + 1 {
        return Err(Error::InsufficientData(format!(
            "adaptation needs at least {} samples, chain has {}",
            p + 1,
            chain.len()
        )));
    }
    let center = DMatrix::from_element(1, p, 0.5);
    let reconciled = postprocess::reconcile_by_index(chain, &center)?;
    let betas = reconciled.chain.betas()?;
    let cov = sample_covariance(&betas);
    let eig = SymmetricEigen::new(cov.clone());
    let max = eig.eigenvalues.max();
    if !(max > 1e-12) || !max.is_finite() {
        log::warn!("degenerate pilot covariance; falling back to diag(0.2)");
        return Ok(AdaptedProposal {
            cov: BetaProposal::default_cov(p),
            fell_back: true,
        });
    }
    let floor = 1e-6 * max;
    let clipped = eig.eigenvalues.map(|l| l.max(floor) * ADAPT_INFLATION);
    let mut out = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    crate::linalg::symmetrize(&mut out);
    Ok(AdaptedProposal {
        cov: out,
        fell_back: false,
    })
}

/// Unbiased sample covariance of row vectors.
pub fn sample_covariance(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let t = rows.len();
    let p = rows.first().map_or(0, |r| r.len());
    let mut mean = DVector::zeros(p);
    for r in rows {
        mean += DVector::from_column_slice(r);
    }
    mean /= t as f64;
    let mut cov = DMatrix::zeros(p, p);
    for r in rows {
        let d = DVector::from_column_slice(r) - &mean;
        cov += &d * d.transpose();
    }
    cov / (t.saturating_sub(1).max(1)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::PriorSpec;

    fn toy_model() -> Model {
        let mut r = rng::seeded(9);
        let x = DMatrix::from_fn(12, 2, |_, _| r.random::<f64>());
        let y = DVector::from_fn(12, |i, _| (3.0 * (x[(i, 0)] - 0.5 * x[(i, 1)])).sin());
        Model::new(x, y, PriorSpec::default()).unwrap()
    }

    #[test]
    fn accept_rules() {
        let mut r = rng::seeded(0);
        for _ in 0..1000 {
            assert!(metropolis_accept(0.0, &mut r));
            assert!(!metropolis_accept(f64::NEG_INFINITY, &mut r));
            assert!(!metropolis_accept(f64::NAN, &mut r));
        }
    }

    #[test]
    fn same_seed_same_chain() {
        let m = toy_model();
        let cfg = McmcConfig {
            n_iter: 300,
            burn_in: 100,
            thin: 1,
            ..McmcConfig::default()
        };
        for kind in [FamilyKind::Sim, FamilyKind::Separable, FamilyKind::Isotropic] {
            let a = run_chain(&m, kind, &cfg).unwrap();
            let b = run_chain(&m, kind, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 200);
            assert!(a.log_post.iter().all(|v| v.is_finite()));
            assert!(a.etas().iter().all(|e| *e >= ETA_FLOOR));
            assert!((0.0..=1.0).contains(&a.accept_eta));
            assert!((0.0..=1.0).contains(&a.accept_main));
        }
    }

    #[test]
    fn single_stored_sample() {
        let m = toy_model();
        let cfg = McmcConfig {
            n_iter: 11,
            burn_in: 10,
            thin: 1,
            ..McmcConfig::default()
        };
        let c = run_chain(&m, FamilyKind::Sim, &cfg).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.iters, vec![11]);
    }

    #[test]
    fn thinning_count() {
        let cfg = McmcConfig {
            n_iter: 107,
            burn_in: 10,
            thin: 3,
            ..McmcConfig::default()
        };
        let c = run_chain(&toy_model(), FamilyKind::Isotropic, &cfg).unwrap();
        assert_eq!(c.len(), 97 / 3);
    }

    #[test]
    fn bad_config() {
        let m = toy_model();
        let cfg = McmcConfig {
            n_iter: 10,
            burn_in: 10,
            ..McmcConfig::default()
        };
        assert!(run_chain(&m, FamilyKind::Sim, &cfg).is_err());
        let cfg = McmcConfig {
            beta_init: Some(vec![1.0]),
            ..McmcConfig::default()
        };
        assert!(run_chain(&m, FamilyKind::Sim, &cfg).is_err());
    }

    #[test]
    fn singular_candidate_is_rejected() {
        let m = toy_model();
        let cfg = McmcConfig::default();
        let sampler = Sampler::new(&m, FamilyKind::Sim, &cfg).unwrap();
        let mut state = sampler.initial_state(&cfg).unwrap();
        let before = state.clone();
        let bad = KernelSpec {
            family: state.spec.family.clone(),
            eta: ETA_FLOOR / 2.0,
        };
        assert!(!sampler.try_move(&mut state, bad, 0.0, &mut rng::seeded(1)));
        assert_eq!(state, before);
    }

    #[test]
    fn proposal_equal_to_current_accepts() {
        let m = toy_model();
        let cfg = McmcConfig::default();
        let sampler = Sampler::new(&m, FamilyKind::Sim, &cfg).unwrap();
        let mut state = sampler.initial_state(&cfg).unwrap();
        let same = state.spec.clone();
        assert!(sampler.try_move(&mut state, same, 0.0, &mut rng::seeded(1)));
    }

    #[test]
    fn adaptation_falls_back_on_identical_samples() {
        let chain = Chain::from_betas(&vec![vec![1.0, 0.5, -0.2]; 10], 0.1).unwrap();
        let a = adapt_proposal(&chain).unwrap();
        assert!(a.fell_back);
        assert_eq!(a.cov, BetaProposal::default_cov(3));
    }

    #[test]
    fn adaptation_needs_enough_samples() {
        let chain = Chain::from_betas(&[vec![1.0, 0.5]], 0.1).unwrap();
        assert!(adapt_proposal(&chain).is_err());
    }
}
