//! Resolving the `β` versus `-β` indeterminacy in SIM chains.
//!
//! The SIM likelihood and the symmetric priors cannot tell `β` from `-β`, so
//! a chain that visits both modes needs its "labels" reconciled before `β`
//! can be summarized. Three heuristics are provided:
//!
//! - [`reconcile_by_index`]: cluster samples by the sign of their mean index
//!   over reference points and flip the minority cluster.
//! - [`reconcile_by_anchor`]: pick a component that is well away from zero
//!   and make it positive in every sample.
//! - [`reconcile_by_covariance`]: read the relative signs of components off
//!   the raw sample covariance, then anchor on the larger sign group.
//!
//! [`point_estimate`] needs no reconciliation at all: it returns the
//! principal eigenvector of `Σₜ β⁽ᵗ⁾β⁽ᵗ⁾ᵀ` over normalized samples, which
//! minimizes the summed `sin²` of the angles to every sample.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::kernels::FamilyKind;
use crate::mcmc::{sample_covariance, Chain};

/// Mean indices closer to zero than this are reported as ambiguous.
pub const CLUSTER_TOL: f64 = 1e-3;

/// Correlations with the anchor row below this magnitude carry no sign
/// information.
pub const COVARIANCE_CORR_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconcileMethod {
    IndexCluster,
    AnchorComponent,
    CovarianceSign,
}

impl ReconcileMethod {
    pub fn from_flag(s: &str) -> Option<Self> {
        match s {
            "index" => Some(ReconcileMethod::IndexCluster),
            "anchor" => Some(ReconcileMethod::AnchorComponent),
            "covariance" | "cov" => Some(ReconcileMethod::CovarianceSign),
            _ => None,
        }
    }
}

/// A chain with per-sample sign flips applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconciledChain {
    pub chain: Chain,
    /// `true` where the sample was negated.
    pub flips: Vec<bool>,
    pub method: ReconcileMethod,
    /// Samples the heuristic could not place (left unflipped).
    pub ambiguous: Vec<usize>,
}

impl ReconciledChain {
    pub fn n_flips(&self) -> usize {
        self.flips.iter().filter(|f| **f).count()
    }

    /// The original chain, recovered by applying the flips a second time.
    pub fn undo(&self) -> Chain {
        apply_flips(&self.chain, &self.flips)
    }
}

fn require_sim(chain: &Chain) -> Result<Vec<Vec<f64>>> {
    if chain.kind != FamilyKind::Sim {
        return Err(Error::Reconcile(format!(
            "only SIM chains carry index vectors, got {}",
            chain.kind
        )));
    }
    if chain.is_empty() {
        return Err(Error::Reconcile("chain is empty".into()));
    }
    chain.betas()
}

/// Negates `β` in the flagged samples. Log posteriors are unchanged because
/// the posterior is sign symmetric.
pub fn apply_flips(chain: &Chain, flips: &[bool]) -> Chain {
    let mut out = chain.clone();
    for (s, f) in out.samples.iter_mut().zip(flips) {
        if *f {
            let neg: Vec<f64> = s.params().iter().map(|b| -b).collect();
            *s = s.with_params(neg, s.eta);
        }
    }
    out
}

fn finish(chain: &Chain, flips: Vec<bool>, method: ReconcileMethod, ambiguous: Vec<usize>) -> ReconciledChain {
    ReconciledChain {
        chain: apply_flips(chain, &flips),
        flips,
        method,
        ambiguous,
    }
}

/// Mean index `mean(X̃ β⁽ᵗ⁾)` of each sample over the reference rows.
pub fn mean_indices(chain: &Chain, reference: &DMatrix<f64>) -> Result<Vec<f64>> {
    let betas = require_sim(chain)?;
    if reference.nrows() == 0 {
        return Err(Error::InsufficientData("reference set has no rows".into()));
    }
    if reference.ncols() != chain.dim {
        return Err(Error::dim("reference points", chain.dim, reference.ncols()));
    }
    let centroid: Vec<f64> = (0..reference.ncols())
        .map(|j| reference.column(j).mean())
        .collect();
    Ok(betas
        .iter()
        .map(|b| b.iter().zip(&centroid).map(|(x, c)| x * c).sum())
        .collect())
}

/// Flips samples whose mean index over `reference` has the minority sign.
///
/// Samples with `|mean index| < CLUSTER_TOL` are left alone and listed as
/// ambiguous. Ties in the vote resolve to positive.
pub fn reconcile_by_index(chain: &Chain, reference: &DMatrix<f64>) -> Result<ReconciledChain> {
    let m = mean_indices(chain, reference)?;
    let ambiguous: Vec<usize> = (0..m.len()).filter(|t| m[*t].abs() < CLUSTER_TOL).collect();
    if !ambiguous.is_empty() {
        log::warn!(
            "{} samples have a mean index within {CLUSTER_TOL:e} of zero; left unflipped",
            ambiguous.len()
        );
    }
    let pos = m.iter().filter(|v| **v >= CLUSTER_TOL).count();
    let neg = m.iter().filter(|v| **v <= -CLUSTER_TOL).count();
    let keep_positive = pos >= neg;
    let flips = m
        .iter()
        .map(|v| {
            if keep_positive {
                *v <= -CLUSTER_TOL
            } else {
                *v >= CLUSTER_TOL
            }
        })
        .collect();
    Ok(finish(chain, flips, ReconcileMethod::IndexCluster, ambiguous))
}

/// `mean |βⱼ| / sd |βⱼ|` for each listed component; large values mark a
/// component that stays well away from zero.
pub fn anchor_scores(betas: &[Vec<f64>], components: &[usize]) -> Vec<f64> {
    let t = betas.len() as f64;
    components
        .iter()
        .map(|&j| {
            let mean = betas.iter().map(|b| b[j].abs()).sum::<f64>() / t;
            let var = betas.iter().map(|b| (b[j].abs() - mean).powi(2)).sum::<f64>() / t;
            let sd = var.sqrt();
            if mean == 0.0 {
                0.0
            } else if sd == 0.0 {
                f64::INFINITY
            } else {
                mean / sd
            }
        })
        .collect()
}

fn best_anchor(betas: &[Vec<f64>], components: &[usize]) -> (usize, f64) {
    let scores = anchor_scores(betas, components);
    let mut best = (components[0], scores[0]);
    for (&j, &s) in components.iter().zip(&scores).skip(1) {
        if s > best.1 {
            best = (j, s);
        }
    }
    best
}

/// Makes the most reliable component positive in every sample.
///
/// Fails when every component straddles zero (score below 1), in which case
/// the index heuristic is the better tool.
pub fn reconcile_by_anchor(chain: &Chain) -> Result<ReconciledChain> {
    let betas = require_sim(chain)?;
    let all: Vec<usize> = (0..chain.dim).collect();
    let (anchor, score) = best_anchor(&betas, &all);
    if score < 1.0 {
        return Err(Error::Reconcile(format!(
            "every component straddles zero (best score {score:.3}); use the index heuristic"
        )));
    }
    let flips = betas.iter().map(|b| b[anchor] < 0.0).collect();
    Ok(finish(chain, flips, ReconcileMethod::AnchorComponent, Vec::new()))
}

/// Components grouped by the sign of their covariance with an anchor row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignGroups {
    /// Row with the largest variance.
    pub anchor: usize,
    /// Components covarying nonnegatively with the anchor (includes it).
    pub same: Vec<usize>,
    pub opposite: Vec<usize>,
    /// Components whose correlation with the anchor is too weak to call.
    pub uninformative: Vec<usize>,
}

impl SignGroups {
    pub fn larger(&self) -> &[usize] {
        if self.opposite.len() > self.same.len() {
            &self.opposite
        } else {
            &self.same
        }
    }
}

/// Partitions components by the sign of their covariance with the
/// largest-variance row.
pub fn sign_groups(cov: &DMatrix<f64>) -> Result<SignGroups> {
    let p = cov.nrows();
    if p == 0 || cov.ncols() != p {
        return Err(Error::dim("covariance matrix", p, cov.ncols()));
    }
    let anchor = (0..p)
        .max_by(|a, b| cov[(*a, *a)].total_cmp(&cov[(*b, *b)]))
        .expect("nonempty");
    let mut g = SignGroups {
        anchor,
        same: vec![anchor],
        opposite: Vec::new(),
        uninformative: Vec::new(),
    };
    for j in (0..p).filter(|j| *j != anchor) {
        let denom = (cov[(anchor, anchor)] * cov[(j, j)]).sqrt();
        let corr = if denom > 0.0 { cov[(anchor, j)] / denom } else { 0.0 };
        if corr.abs() < COVARIANCE_CORR_TOL {
            g.uninformative.push(j);
        } else if corr > 0.0 {
            g.same.push(j);
        } else {
            g.opposite.push(j);
        }
    }
    g.same.sort_unstable();
    Ok(g)
}

/// Splits components into sign groups using the raw sample covariance, then
/// anchors on the best component of the larger group.
///
/// When the covariance is uninformative about every other component the
/// chain is accepted as-is if the anchor row never changes sign, and rejected
/// as ambiguous otherwise.
pub fn reconcile_by_covariance(chain: &Chain) -> Result<ReconciledChain> {
    let betas = require_sim(chain)?;
    let p = chain.dim;
    if betas.len() < p + 1 {
        return Err(Error::InsufficientData(format!(
            "covariance heuristic needs at least {} samples",
            p + 1
        )));
    }
    let cov = sample_covariance(&betas);
    let groups = sign_groups(&cov)?;
    if p > 1 && groups.same.len() == 1 && groups.opposite.is_empty() {
        let a = groups.anchor;
        let pos = betas.iter().filter(|b| b[a] > 0.0).count();
        let neg = betas.iter().filter(|b| b[a] < 0.0).count();
        if pos > 0 && neg > 0 {
            return Err(Error::Reconcile(
                "covariance is uninformative about relative signs; use the index heuristic"
                    .into(),
            ));
        }
        let flips = betas.iter().map(|b| b[a] < 0.0).collect();
        return Ok(finish(chain, flips, ReconcileMethod::CovarianceSign, Vec::new()));
    }
    let (anchor, _) = best_anchor(&betas, groups.larger());
    let flips = betas.iter().map(|b| b[anchor] < 0.0).collect();
    Ok(finish(chain, flips, ReconcileMethod::CovarianceSign, Vec::new()))
}

/// Runs the named heuristic. `reference` is required for the index method.
pub fn reconcile(
    chain: &Chain,
    method: ReconcileMethod,
    reference: Option<&DMatrix<f64>>,
) -> Result<ReconciledChain> {
    match method {
        ReconcileMethod::IndexCluster => {
            let r = reference.ok_or_else(|| {
                Error::InvalidParameter("the index heuristic needs reference points".into())
            })?;
            reconcile_by_index(chain, r)
        }
        ReconcileMethod::AnchorComponent => reconcile_by_anchor(chain),
        ReconcileMethod::CovarianceSign => reconcile_by_covariance(chain),
    }
}

/// Fraction of samples on which two flip vectors induce the same
/// 2-partition, allowing for a global sign swap.
pub fn partition_agreement(a: &[bool], b: &[bool]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 1.0;
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    same.max(n - same) as f64 / n as f64
}

/// Index vectors scaled to unit norm. Zero vectors are rejected.
pub fn normalized_betas(chain: &Chain) -> Result<Vec<Vec<f64>>> {
    require_sim(chain)?
        .into_iter()
        .map(|b| {
            let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(Error::Undefined("index vector with zero norm".into()));
            }
            Ok(b.iter().map(|v| v / norm).collect())
        })
        .collect()
}

/// Unit vector minimizing `Σₜ sin²∠(β, β⁽ᵗ⁾)`: the principal eigenvector of
/// `Σₜ uₜuₜᵀ` over normalized samples `uₜ`.
///
/// The sign is chosen so that most samples point the same way as the
/// estimate; on a tie the largest-magnitude component is made positive.
pub fn point_estimate(chain: &Chain) -> Result<Vec<f64>> {
    let units = normalized_betas(chain)?;
    let p = chain.dim;
    let mut scatter = DMatrix::zeros(p, p);
    for u in &units {
        let v = DVector::from_column_slice(u);
        scatter += &v * v.transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let top = eig.eigenvalues[order[0]];
    if p > 1 {
        let second = eig.eigenvalues[order[1]];
        if (top - second).abs() <= 1e-10 * top.abs().max(1.0) {
            return Err(Error::Undefined(
                "leading eigenvalues are tied; the index direction is undefined".into(),
            ));
        }
    }
    let mut est: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let norm = est.iter().map(|v| v * v).sum::<f64>().sqrt();
    est.iter_mut().for_each(|v| *v /= norm);

    let dots: Vec<f64> = units
        .iter()
        .map(|u| u.iter().zip(&est).map(|(a, b)| a * b).sum())
        .collect();
    let pos = dots.iter().filter(|d| **d > 0.0).count();
    let neg = dots.iter().filter(|d| **d < 0.0).count();
    let flip = if pos != neg {
        neg > pos
    } else {
        let big = est
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        big < 0.0
    };
    if flip {
        est.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(est)
}

/// Length-scales implied by each sample, `θ = ‖β‖⁻²`.
///
/// Since `β/√θ` is what the data identify, fixing `θ = 1` in the rank-1
/// kernel moves the length-scale into the norm of `β`.
pub fn implied_theta(chain: &Chain) -> Result<Vec<f64>> {
    require_sim(chain)?
        .iter()
        .map(|b| {
            let sq = b.iter().map(|v| v * v).sum::<f64>();
            if sq.sqrt() < 1e-12 {
                return Err(Error::Undefined(
                    "implied length-scale of a zero index vector".into(),
                ));
            }
            Ok(1.0 / sq)
        })
        .collect()
}

/// Angle in radians between two directions, ignoring sign.
pub fn axis_angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    (dot.abs() / (na * nb)).clamp(0.0, 1.0).acos()
}
