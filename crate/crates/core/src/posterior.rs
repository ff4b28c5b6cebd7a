//! Priors and the σ²-marginalized log posterior.
//!
//! With `Y | K, σ² ~ N(0, σ² K)` and `σ² ~ IG(a_σ/2, b_σ/2)` the scale can be
//! integrated out, leaving
//!
//! ```text
//! log p(K | X, Y) = log p(K) + (a_σ/2) log(b_σ/2) + log Γ((a_σ+n)/2)
//!                   - ½ log|K| - (n/2) log 2π - log Γ(a_σ/2)
//!                   - ((a_σ+n)/2) log((b_σ + YᵀK⁻¹Y)/2)
//! ```
//!
//! The Jeffreys case `a_σ = b_σ = 0` drops the `Γ(a_σ/2)` and `(b_σ/2)^{a_σ/2}`
//! factors.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::kernels::{build_corr_matrix, CorrMatrix, Family, KernelSpec};
use crate::linalg;

/// Prior on the SIM index vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BetaPrior {
    /// `|βⱼ| ~ Gamma(shape, rate)` independently, with a random sign.
    SymmetricGamma { shape: f64, rate: f64 },
    /// `β ~ N(mean, cov)`.
    Mvn { mean: Vec<f64>, cov: Vec<Vec<f64>> },
}

/// Prior on each separable/isotropic length-scale `θ`, for the kernel
/// `exp{-Δ²/θ}` on unit-cube inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LengthScalePrior {
    Gamma { shape: f64, rate: f64 },
    /// Weighted Gamma mixture; the weights must sum to one.
    GammaMixture { components: Vec<GammaComponent> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaComponent {
    pub weight: f64,
    pub shape: f64,
    pub rate: f64,
}

impl Default for LengthScalePrior {
    /// Half the mass near short length-scales (mean 0.05), half around 1.
    fn default() -> Self {
        LengthScalePrior::GammaMixture {
            components: vec![
                GammaComponent { weight: 0.5, shape: 1.0, rate: 20.0 },
                GammaComponent { weight: 0.5, shape: 10.0, rate: 10.0 },
            ],
        }
    }
}

impl LengthScalePrior {
    pub fn log_pdf(&self, theta: f64) -> f64 {
        match self {
            LengthScalePrior::Gamma { shape, rate } => gamma_log_pdf(theta, *shape, *rate),
            LengthScalePrior::GammaMixture { components } => {
                let terms: Vec<f64> = components
                    .iter()
                    .map(|c| c.weight.ln() + gamma_log_pdf(theta, c.shape, c.rate))
                    .collect();
                let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if top == f64::NEG_INFINITY {
                    return top;
                }
                top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            LengthScalePrior::Gamma { shape, rate } => check_gamma("theta", *shape, *rate),
            LengthScalePrior::GammaMixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidParameter("theta mixture has no components".into()));
                }
                for c in components {
                    check_gamma("theta", c.shape, c.rate)?;
                    if !(c.weight > 0.0 && c.weight.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "theta mixture weight must be positive, got {}",
                            c.weight
                        )));
                    }
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "theta mixture weights sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Hyperprior constants. Gamma distributions use the shape/rate form, so the
/// prior mean is `shape / rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSpec {
    pub a_sigma: f64,
    pub b_sigma: f64,
    pub a_eta: f64,
    pub b_eta: f64,
    pub beta: BetaPrior,
    pub theta: LengthScalePrior,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            a_sigma: 0.0,
            b_sigma: 0.0,
            a_eta: 1.5,
            b_eta: 30.0,
            beta: BetaPrior::SymmetricGamma {
                shape: 1.5,
                rate: 1.5,
            },
            theta: LengthScalePrior::default(),
        }
    }
}

impl PriorSpec {
    pub fn is_jeffreys(&self) -> bool {
        self.a_sigma == 0.0 && self.b_sigma == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        check_scale_prior(self.a_sigma, self.b_sigma)?;
        check_gamma("eta", self.a_eta, self.b_eta)?;
        self.theta.validate()?;
        match &self.beta {
            BetaPrior::SymmetricGamma { shape, rate } => check_gamma("beta", *shape, *rate)?,
            BetaPrior::Mvn { mean, cov } => {
                if cov.len() != mean.len() || cov.iter().any(|r| r.len() != mean.len()) {
                    return Err(Error::InvalidParameter(
                        "beta prior covariance must be square and match the mean".into(),
                    ));
                }
                linalg::spd_cholesky(&rows_to_matrix(cov), "beta prior covariance")?;
            }
        }
        Ok(())
    }
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

fn check_gamma(name: &str, shape: f64, rate: f64) -> Result<()> {
    if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} prior needs positive shape and rate, got ({shape}, {rate})"
        )));
    }
    Ok(())
}

fn check_scale_prior(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale prior constants must be nonnegative, got ({a}, {b})"
        )));
    }
    if a > 0.0 && b == 0.0 {
        return Err(Error::InvalidParameter(
            "scale prior with a_sigma > 0 needs b_sigma > 0".into(),
        ));
    }
    Ok(())
}

/// Log density of `Gamma(shape, rate)` at `x`.
pub fn gamma_log_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    if x == 0.0 {
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Equal) => rate.ln(),
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

fn mvn_log_pdf(x: &[f64], mean: &[f64], cov: &[Vec<f64>]) -> Result<f64> {
    if x.len() != mean.len() {
        return Err(Error::dim("beta prior", mean.len(), x.len()));
    }
    let ch = linalg::spd_cholesky(&rows_to_matrix(cov), "beta prior covariance")?;
    let d = DVector::from_iterator(x.len(), x.iter().zip(mean).map(|(a, m)| a - m));
    let z = linalg::solve_lower_vec(&ch, &d);
    let p = x.len() as f64;
    Ok(-0.5 * z.norm_squared() - 0.5 * linalg::log_det(&ch) - 0.5 * p * (2.0 * PI).ln())
}

/// Split log posterior value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPosteriorValue {
    pub log_prior: f64,
    pub log_marginal_lik: f64,
    pub total: f64,
}

/// Log of the σ²-marginalized likelihood of `y` under correlation `k`.
pub fn log_marginal_likelihood(
    y: &DVector<f64>,
    k: &CorrMatrix,
    a_sigma: f64,
    b_sigma: f64,
) -> Result<f64> {
    check_scale_prior(a_sigma, b_sigma)?;
    let n = y.len();
    if k.size() != n {
        return Err(Error::dim("marginal likelihood", k.size(), n));
    }
    if a_sigma == 0.0 && b_sigma == 0.0 && n <= 1 {
        return Err(Error::InsufficientData(
            "the Jeffreys scale prior needs at least two observations".into(),
        ));
    }
    let q = k.quad_form(y);
    if b_sigma + q <= 0.0 {
        return Err(Error::Undefined(
            "marginal likelihood is unbounded for an all-zero response".into(),
        ));
    }
    let nf = n as f64;
    let a = a_sigma;
    let mut v = ln_gamma((a + nf) / 2.0) - 0.5 * k.logdet() - 0.5 * nf * (2.0 * PI).ln()
        - 0.5 * (a + nf) * ((b_sigma + q) / 2.0).ln();
    if a > 0.0 {
        v += 0.5 * a * (b_sigma / 2.0).ln() - ln_gamma(a / 2.0);
    }
    Ok(v)
}

/// Log prior density of the kernel parameters.
pub fn log_prior(spec: &KernelSpec, priors: &PriorSpec) -> Result<f64> {
    priors.validate()?;
    if !(spec.eta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "nugget must be positive, got {}",
            spec.eta
        )));
    }
    let mut lp = gamma_log_pdf(spec.eta, priors.a_eta, priors.b_eta);
    match &spec.family {
        Family::Sim { beta } => match &priors.beta {
            BetaPrior::SymmetricGamma { shape, rate } => {
                let p = beta.len() as f64;
                lp += beta
                    .iter()
                    .map(|b| gamma_log_pdf(b.abs(), *shape, *rate))
                    .sum::<f64>()
                    - p * std::f64::consts::LN_2;
            }
            BetaPrior::Mvn { mean, cov } => lp += mvn_log_pdf(beta, mean, cov)?,
        },
        Family::Separable { theta } => {
            lp += theta
                .iter()
                .map(|t| priors.theta.log_pdf(*t))
                .sum::<f64>();
        }
        Family::Isotropic { theta } => {
            lp += priors.theta.log_pdf(*theta);
        }
    }
    Ok(lp)
}

/// Full log posterior (up to the normalizing constant) of a kernel spec.
pub fn log_posterior(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    spec: &KernelSpec,
    priors: &PriorSpec,
) -> Result<LogPosteriorValue> {
    if x.nrows() != y.len() {
        return Err(Error::dim("log posterior", x.nrows(), y.len()));
    }
    let log_prior = log_prior(spec, priors)?;
    let k = build_corr_matrix(x, spec)?;
    let log_marginal_lik = log_marginal_likelihood(y, &k, priors.a_sigma, priors.b_sigma)?;
    Ok(LogPosteriorValue {
        log_prior,
        log_marginal_lik,
        total: log_prior + log_marginal_lik,
    })
}

/// Training data plus priors: everything the sampler and predictors need.
#[derive(Debug, Clone)]
pub struct Model {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub priors: PriorSpec,
}

impl Model {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, priors: PriorSpec) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::dim("training data", x.nrows(), y.len()));
        }
        if x.nrows() == 0 {
            return Err(Error::InsufficientData("no training rows".into()));
        }
        priors.validate()?;
        if priors.is_jeffreys() && x.nrows() < 2 {
            return Err(Error::InsufficientData(
                "the Jeffreys scale prior needs at least two observations".into(),
            ));
        }
        Ok(Model { x, y, priors })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn log_posterior(&self, spec: &KernelSpec) -> Result<LogPosteriorValue> {
        log_posterior(&self.y, &self.x, spec, &self.priors)
    }
}
