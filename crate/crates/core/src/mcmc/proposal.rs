//! Random-walk proposals for the nugget, length-scales and index vector.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::orthant::{mask_signs, OrthantTable};
use crate::error::{Error, Result};
use crate::linalg;

/// Uniform sliding window `η' ~ U[3η/4, 4η/3]`.
///
/// Returns the proposal and `log q(η|η') - log q(η'|η) = log(η/η')`. The
/// window width is proportional to its center, so the move is asymmetric.
pub fn propose_eta<R: Rng + ?Sized>(eta: f64, rng: &mut R) -> (f64, f64) {
    let lo = 0.75 * eta;
    let hi = 4.0 * eta / 3.0;
    let prop = lo + (hi - lo) * rng.random::<f64>();
    (prop, sliding_window_log_q_ratio(eta, prop))
}

/// `log q(from|to) - log q(to|from)` for the sliding window.
pub fn sliding_window_log_q_ratio(from: f64, to: f64) -> f64 {
    (from / to).ln()
}

/// Block Gaussian random walk for `β`, optionally compounded with random
/// sign flips.
///
/// With flips, `β' = s ∘ b` where `b ~ N(β, Σ)` and `s = sign(z)`,
/// `z ~ N(0, Σ)`. The proposal density is then the mixture
/// `q(β'|β) = Σₛ P(s) N(s∘β'; β, Σ)` over all sign patterns, weighted by
/// orthant probabilities.
#[derive(Debug, Clone)]
pub struct BetaProposal {
    cov: DMatrix<f64>,
    chol_l: DMatrix<f64>,
    flips: Option<OrthantTable>,
}

impl BetaProposal {
    pub fn new(cov: DMatrix<f64>, sign_flips: bool) -> Result<Self> {
        let chol = linalg::spd_cholesky(&cov, "beta proposal covariance")?;
        let flips = if sign_flips {
            Some(OrthantTable::new(&cov)?)
        } else {
            None
        };
        Ok(BetaProposal {
            chol_l: chol.l(),
            cov,
            flips,
        })
    }

    /// `diag(0.2)`, which suits unit-cube inputs.
    pub fn default_cov(p: usize) -> DMatrix<f64> {
        DMatrix::from_diagonal_element(p, p, 0.2)
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    pub fn sign_flips(&self) -> bool {
        self.flips.is_some()
    }

    pub fn orthants(&self) -> Option<&OrthantTable> {
        self.flips.as_ref()
    }

    fn gaussian<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let p = self.dim();
        let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.chol_l * z
    }

    /// `-½ (a - b)ᵀ Σ⁻¹ (a - b)`.
    fn log_kernel(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let d = a - b;
        let v = self
            .chol_l
            .solve_lower_triangular(&d)
            .expect("proposal factor has a nonzero diagonal");
        -0.5 * v.norm_squared()
    }

    /// Log proposal density of moving `from → to`, up to a constant shared by
    /// every pair of points.
    pub fn log_density(&self, from: &[f64], to: &[f64]) -> f64 {
        let from = DVector::from_column_slice(from);
        let to = DVector::from_column_slice(to);
        match &self.flips {
            None => self.log_kernel(&to, &from),
            Some(table) => {
                let p = self.dim();
                let terms: Vec<f64> = (0..1usize << p)
                    .filter_map(|m| {
                        let prob = table.prob_mask(m);
                        if prob <= 0.0 {
                            return None;
                        }
                        let s = mask_signs(m, p);
                        let flipped =
                            DVector::from_fn(p, |j, _| f64::from(s[j]) * to[j]);
                        Some(prob.ln() + self.log_kernel(&flipped, &from))
                    })
                    .collect();
                log_sum_exp(&terms)
            }
        }
    }

    /// Draws `β'` and returns `log q(β|β') - log q(β'|β)`.
    pub fn propose<R: Rng + ?Sized>(&self, beta: &[f64], rng: &mut R) -> Result<(Vec<f64>, f64)> {
        let p = self.dim();
        if beta.len() != p {
            return Err(Error::dim("beta proposal", p, beta.len()));
        }
        let step = self.gaussian(rng);
        let mut prop: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + s).collect();
        if self.flips.is_none() {
            return Ok((prop, 0.0));
        }
        let z = self.gaussian(rng);
        for (v, zj) in prop.iter_mut().zip(z.iter()) {
            if *zj < 0.0 {
                *v = -*v;
            }
        }
        let log_q = self.log_density(&prop, beta) - self.log_density(beta, &prop);
        if !log_q.is_finite() {
            let signs: Vec<i8> = z.iter().map(|v| if *v < 0.0 { -1 } else { 1 }).collect();
            return Err(Error::Orthant {
                signs,
                reason: "proposal density ratio is not finite".into(),
            });
        }
        Ok((prop, log_q))
    }
}

/// Draws `β'` from `proposal`; see [`BetaProposal::propose`].
pub fn propose_beta<R: Rng + ?Sized>(
    beta: &[f64],
    proposal: &BetaProposal,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    proposal.propose(beta, rng)
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
