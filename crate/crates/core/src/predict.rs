//! Student-t kriging.
//!
//! Given a kernel spec, the predictive law of `Y(x*)` is Student-t with
//!
//! ```text
//! mean   k(x*)ᵀ K⁻¹ Y
//! scale² (b_σ + YᵀK⁻¹Y) (K(x*, x*) − k(x*)ᵀ K⁻¹ k(x*)) / (a_σ + n − 1)
//! dof    a_σ + n − 1
//! ```
//!
//! The joint law over several points replaces the bracket with the
//! conditional covariance matrix. Posterior summaries average these laws
//! over the samples of a chain.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{build_corr_matrix, cross_corr_matrix, self_corr_matrix, CorrMatrix, KernelSpec};
use crate::linalg;
use crate::mcmc::Chain;
use crate::metrics::quantile_sorted;
use crate::posterior::{Model, PriorSpec};
use crate::rng;

/// What a prediction is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// The noisy response: `K(x, x) = 1 + η`.
    #[default]
    Response,
    /// The latent process without the nugget, for deterministic codes.
    Latent,
}

/// Multivariate Student-t law.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveT {
    pub mean: DVector<f64>,
    /// Scale matrix (the covariance is `scale · dof/(dof − 2)`).
    pub scale: DMatrix<f64>,
    pub dof: f64,
}

impl PredictiveT {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// `dof/(dof − 2)`, or 1 when the variance is undefined.
    pub fn variance_factor(&self) -> f64 {
        variance_factor(self.dof)
    }

    /// Covariance matrix of the law.
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.scale * self.variance_factor()
    }
}

pub(crate) fn variance_factor(dof: f64) -> f64 {
    if dof > 2.0 {
        dof / (dof - 2.0)
    } else {
        1.0
    }
}

/// A kernel spec conditioned on training data, reusable across many
/// prediction points.
#[derive(Debug, Clone)]
pub struct Fitted<'a> {
    x: &'a DMatrix<f64>,
    spec: KernelSpec,
    k: CorrMatrix,
    alpha: DVector<f64>,
    /// `(b_σ + YᵀK⁻¹Y)/(a_σ + n − 1)`.
    factor: f64,
    dof: f64,
}

impl<'a> Fitted<'a> {
    pub fn new(
        x: &'a DMatrix<f64>,
        y: &DVector<f64>,
        spec: &KernelSpec,
        priors: &PriorSpec,
    ) -> Result<Self> {
        let n = x.nrows();
        if y.len() != n {
            return Err(Error::dim("prediction training data", n, y.len()));
        }
        if n < 2 && priors.is_jeffreys() {
            return Err(Error::InsufficientData(
                "prediction under the Jeffreys prior needs at least two observations".into(),
            ));
        }
        let dof = priors.a_sigma + n as f64 - 1.0;
        if !(dof > 0.0) {
            return Err(Error::InsufficientData("nonpositive predictive dof".into()));
        }
        let k = build_corr_matrix(x, spec)?;
        let alpha = k.solve(y);
        let q = y.dot(&alpha);
        Ok(Fitted {
            x,
            spec: spec.clone(),
            factor: (priors.b_sigma + q) / dof,
            alpha,
            k,
            dof,
        })
    }

    pub fn from_model(model: &'a Model, spec: &KernelSpec) -> Result<Self> {
        Fitted::new(&model.x, &model.y, spec, &model.priors)
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    fn check_points(&self, xstar: &DMatrix<f64>) -> Result<()> {
        if xstar.ncols() != self.x.ncols() {
            return Err(Error::dim("prediction points", self.x.ncols(), xstar.ncols()));
        }
        if xstar.nrows() == 0 {
            return Err(Error::InsufficientData("no prediction points".into()));
        }
        Ok(())
    }

    /// `L⁻¹ k(X, X*)` and the predictive means.
    fn solve_cross(&self, xstar: &DMatrix<f64>, target: Target) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let kc = cross_corr_matrix(xstar, self.x, &self.spec, target == Target::Response)?;
        let mean = &kc * &self.alpha;
        let v = linalg::solve_lower(self.k.cholesky(), &kc.transpose());
        Ok((v, mean))
    }

    /// Pointwise means and squared scales at each row of `xstar`.
    pub fn pointwise(&self, xstar: &DMatrix<f64>, target: Target) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_points(xstar)?;
        let (v, mean) = self.solve_cross(xstar, target)?;
        let prior_var = match target {
            Target::Response => 1.0 + self.spec.eta,
            Target::Latent => 1.0,
        };
        let scale2 = DVector::from_fn(xstar.nrows(), |i, _| {
            let reduced = prior_var - v.column(i).norm_squared();
            self.factor * reduced.max(0.0)
        });
        Ok((mean, scale2))
    }

    /// Joint Student-t law over all rows of `xstar`.
    pub fn joint(&self, xstar: &DMatrix<f64>, target: Target) -> Result<PredictiveT> {
        self.check_points(xstar)?;
        let (v, mean) = self.solve_cross(xstar, target)?;
        let mut cov = self_corr_matrix(xstar, &self.spec, target == Target::Response)?;
        cov -= v.tr_mul(&v);
        cov *= self.factor;
        linalg::symmetrize(&mut cov);
        Ok(PredictiveT {
            mean,
            scale: cov,
            dof: self.dof,
        })
    }

    /// Latent variance bracket `1 − k(x)ᵀK⁻¹k(x)` with `k` excluding the
    /// nugget; nonnegative in exact arithmetic.
    pub fn latent_reduction(&self, xstar: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.check_points(xstar)?;
        let (v, _) = self.solve_cross(xstar, Target::Latent)?;
        Ok(DVector::from_fn(xstar.nrows(), |i, _| 1.0 - v.column(i).norm_squared()))
    }
}

/// Predictive law of the noisy response at one point.
pub fn predictive(
    xstar: &[f64],
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    spec: &KernelSpec,
    priors: &PriorSpec,
) -> Result<PredictiveT> {
    predictive_for(xstar, y, x, spec, priors, Target::Response)
}

pub fn predictive_for(
    xstar: &[f64],
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    spec: &KernelSpec,
    priors: &PriorSpec,
    target: Target,
) -> Result<PredictiveT> {
    if xstar.len() != x.ncols() {
        return Err(Error::dim("prediction point", x.ncols(), xstar.len()));
    }
    let fitted = Fitted::new(x, y, spec, priors)?;
    let xs = DMatrix::from_row_slice(1, xstar.len(), xstar);
    let (mean, scale2) = fitted.pointwise(&xs, target)?;
    Ok(PredictiveT {
        mean,
        scale: DMatrix::from_element(1, 1, scale2[0]),
        dof: fitted.dof,
    })
}

/// Joint predictive law of the noisy response at the rows of `xstar`.
pub fn joint_predictive(
    xstar: &DMatrix<f64>,
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    spec: &KernelSpec,
    priors: &PriorSpec,
) -> Result<PredictiveT> {
    Fitted::new(x, y, spec, priors)?.joint(xstar, Target::Response)
}

/// `n_draws × N` draws from a multivariate Student-t law.
///
/// Uses the scale mixture `mean + z/√(w/ν)` with `z ~ N(0, scale)` and
/// `w ~ χ²_ν`. Rank-deficient scales are factored by eigendecomposition.
pub fn sample_paths<R: Rng + ?Sized>(
    pred: &PredictiveT,
    n_draws: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if !(pred.dof > 0.0) {
        return Err(Error::InvalidParameter(format!("dof {} must be positive", pred.dof)));
    }
    if pred.dof <= 2.0 {
        log::warn!("dof {} <= 2: the predictive covariance is undefined", pred.dof);
    }
    let n = pred.len();
    let a = linalg::psd_factor(&pred.scale);
    let chi = ChiSquared::new(pred.dof)
        .map_err(|e| Error::InvalidParameter(format!("chi-squared dof: {e}")))?;
    let mut out = DMatrix::zeros(n_draws, n);
    for d in 0..n_draws {
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w: f64 = chi.sample(rng);
        let s = (pred.dof / w).sqrt();
        let path = &a * z * s + &pred.mean;
        out.row_mut(d).copy_from(&path.transpose());
    }
    Ok(out)
}

/// One draw from a univariate Student-t law.
fn draw_t<R: Rng + ?Sized>(mean: f64, scale: f64, chi: &ChiSquared<f64>, dof: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let w: f64 = chi.sample(rng);
    mean + scale * z * (dof / w).sqrt()
}

/// Draws per chain sample used for mixture quantiles.
pub const MIXTURE_DRAWS: usize = 100;

/// Posterior summary of an equal-weight Student-t mixture at each point.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePrediction {
    pub mean: Vec<f64>,
    /// Square root of the mixture variance.
    pub sd: Vec<f64>,
    pub probs: Vec<f64>,
    /// `quantiles[i][q]` at point `i` and probability `probs[q]`.
    pub quantiles: Vec<Vec<f64>>,
    /// Posterior mean index, SIM chains only.
    pub mean_index: Option<Vec<f64>>,
}

pub(crate) fn pointwise_per_sample(
    xstar: &DMatrix<f64>,
    model: &Model,
    chain: &Chain,
    target: Target,
) -> Result<Vec<(DVector<f64>, DVector<f64>, f64)>> {
    chain
        .samples
        .par_iter()
        .map(|spec| {
            let f = Fitted::from_model(model, spec)?;
            let (m, s2) = f.pointwise(xstar, target)?;
            Ok((m, s2, f.dof))
        })
        .collect()
}

/// Averages the pointwise predictive laws of every chain sample.
///
/// Means and standard deviations come from the mixture moments; quantiles
/// from [`MIXTURE_DRAWS`] draws per chain sample on streams keyed by
/// `(seed, sample, point)`.
pub fn mixture_predict(
    xstar: &DMatrix<f64>,
    model: &Model,
    chain: &Chain,
    probs: &[f64],
    seed: u64,
) -> Result<MixturePrediction> {
    mixture_predict_for(xstar, model, chain, probs, seed, Target::Response)
}

pub fn mixture_predict_for(
    xstar: &DMatrix<f64>,
    model: &Model,
    chain: &Chain,
    probs: &[f64],
    seed: u64,
    target: Target,
) -> Result<MixturePrediction> {
    if chain.is_empty() {
        return Err(Error::InsufficientData("chain has no samples".into()));
    }
    if let Some(q) = probs.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(Error::InvalidParameter(format!("quantile {q} outside [0,1]")));
    }
    let per = pointwise_per_sample(xstar, model, chain, target)?;
    let t = per.len() as f64;
    let npts = xstar.nrows();

    let rows: Vec<(f64, f64, Vec<f64>)> = (0..npts)
        .into_par_iter()
        .map(|i| {
            let mean = per.iter().map(|(m, _, _)| m[i]).sum::<f64>() / t;
            let within = per
                .iter()
                .map(|(_, s2, dof)| s2[i] * variance_factor(*dof))
                .sum::<f64>()
                / t;
            let between = per.iter().map(|(m, _, _)| (m[i] - mean).powi(2)).sum::<f64>() / t;
            let mut pool = Vec::with_capacity(per.len() * MIXTURE_DRAWS);
            for (s, (m, s2, dof)) in per.iter().enumerate() {
                let chi = ChiSquared::new(*dof).expect("dof checked positive");
                let mut r = rng::substream(seed, ((s as u64) << 32) | i as u64);
                let scale = s2[i].sqrt();
                for _ in 0..MIXTURE_DRAWS {
                    pool.push(draw_t(m[i], scale, &chi, *dof, &mut r));
                }
            }
            pool.sort_by(f64::total_cmp);
            let qs = probs.iter().map(|q| quantile_sorted(&pool, *q)).collect();
            (mean, (within + between).sqrt(), qs)
        })
        .collect();

    let mean_index = if chain.kind == crate::kernels::FamilyKind::Sim {
        Some(posterior_indices(xstar, chain)?.mean)
    } else {
        None
    };
    let mut out = MixturePrediction {
        mean: Vec::with_capacity(npts),
        sd: Vec::with_capacity(npts),
        probs: probs.to_vec(),
        quantiles: Vec::with_capacity(npts),
        mean_index,
    };
    for (m, sd, q) in rows {
        out.mean.push(m);
        out.sd.push(sd);
        out.quantiles.push(q);
    }
    Ok(out)
}

/// Samples per accumulation block in [`mixture_moments`]; fixed so the
/// summation order does not depend on the thread count.
const MOMENT_BLOCK: usize = 16;

/// Mean vector and covariance matrix of the posterior predictive mixture at
/// the rows of `xstar`, by the law of total covariance:
/// `E[scale · ν/(ν−2)] + Cov[mean]`.
pub fn mixture_moments(
    xstar: &DMatrix<f64>,
    model: &Model,
    chain: &Chain,
    target: Target,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if chain.is_empty() {
        return Err(Error::InsufficientData("chain has no samples".into()));
    }
    let npts = xstar.nrows();
    let blocks: Vec<(DMatrix<f64>, Vec<DVector<f64>>)> = chain
        .samples
        .par_chunks(MOMENT_BLOCK)
        .map(|block| {
            let mut acc = DMatrix::zeros(npts, npts);
            let mut means = Vec::with_capacity(block.len());
            for spec in block {
                let law = Fitted::from_model(model, spec)?.joint(xstar, target)?;
                acc += &law.scale * law.variance_factor();
                means.push(law.mean);
            }
            Ok((acc, means))
        })
        .collect::<Result<_>>()?;
    let t = chain.len() as f64;
    let mut within = DMatrix::zeros(npts, npts);
    let mut means = Vec::with_capacity(chain.len());
    for (acc, m) in blocks {
        within += acc;
        means.extend(m);
    }
    within /= t;
    let mut mean = DVector::zeros(npts);
    for m in &means {
        mean += m;
    }
    mean /= t;
    let mut between = DMatrix::zeros(npts, npts);
    for m in &means {
        let d = m - &mean;
        between.ger(1.0, &d, &d, 1.0);
    }
    between /= t;
    let mut cov = within + between;
    linalg::symmetrize(&mut cov);
    Ok((mean, cov))
}

/// Per-sample indices `xᵀβ⁽ᵗ⁾` at each prediction point.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSamples {
    /// Mean over samples, one per point.
    pub mean: Vec<f64>,
    /// `T × N` matrix of sample indices.
    pub samples: DMatrix<f64>,
}

/// Collects `x*ᵀβ` for every sample of a SIM chain.
pub fn posterior_indices(xstar: &DMatrix<f64>, chain: &Chain) -> Result<IndexSamples> {
    let betas = chain.betas()?;
    if xstar.ncols() != chain.dim {
        return Err(Error::dim("index points", chain.dim, xstar.ncols()));
    }
    let b = DMatrix::from_fn(betas.len(), chain.dim, |t, j| betas[t][j]);
    let samples = b * xstar.transpose();
    let mean = (0..xstar.nrows()).map(|i| samples.column(i).mean()).collect();
    Ok(IndexSamples { mean, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ETA_FLOOR;

    fn data() -> (DMatrix<f64>, DVector<f64>) {
        let x = DMatrix::from_row_slice(
            5,
            2,
            &[0.1, 0.9, 0.4, 0.3, 0.7, 0.6, 0.2, 0.2, 0.95, 0.05],
        );
        let y = DVector::from_vec(vec![0.5, -0.2, 0.9, 0.1, -0.7]);
        (x, y)
    }

    #[test]
    fn interpolates_training_points() {
        let (x, y) = data();
        let spec = KernelSpec::sim(vec![2.0, -1.0], ETA_FLOOR).unwrap();
        let priors = PriorSpec::default();
        for i in 0..5 {
            let xi: Vec<f64> = x.row(i).iter().copied().collect();
            let p = predictive(&xi, &y, &x, &spec, &priors).unwrap();
            assert!((p.mean[0] - y[i]).abs() < 1e-6);
            let f = Fitted::new(&x, &y, &spec, &priors).unwrap();
            let red = f.latent_reduction(&DMatrix::from_row_slice(1, 2, &xi)).unwrap();
            assert!(red[0] <= 2.0 * ETA_FLOOR + 1e-9);
        }
    }

    #[test]
    fn orthogonal_points_two_by_two() {
        // Indices 0 and 10 are far apart, so K ≈ (1+η)I.
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let y = DVector::from_vec(vec![0.7, -0.4]);
        let spec = KernelSpec::sim(vec![10.0, 0.0], 0.1).unwrap();
        let priors = PriorSpec::default();
        let xs = [0.03, 0.5];
        let p = predictive(&xs, &y, &x, &spec, &priors).unwrap();
        let k1 = (-(0.3f64).powi(2)).exp();
        let k2 = (-(9.7f64).powi(2)).exp();
        let expect = k1 * 0.7 / 1.1 + k2 * -0.4 / 1.1;
        assert!((p.mean[0] - expect).abs() < 1e-12);
        assert_eq!(p.dof, 1.0);
    }

    #[test]
    fn single_point_joint_matches_pointwise() {
        let (x, y) = data();
        let spec = KernelSpec::separable(vec![0.3, 0.8], 0.05).unwrap();
        let priors = PriorSpec::default();
        let xs = [0.33, 0.44];
        let a = predictive(&xs, &y, &x, &spec, &priors).unwrap();
        let b = joint_predictive(&DMatrix::from_row_slice(1, 2, &xs), &y, &x, &spec, &priors).unwrap();
        assert!((a.mean[0] - b.mean[0]).abs() < 1e-14);
        assert!((a.scale[(0, 0)] - b.scale[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn duplicate_prediction_rows() {
        let (x, y) = data();
        let spec = KernelSpec::sim(vec![1.5, 0.5], 0.05).unwrap();
        let priors = PriorSpec::default();
        let xs = DMatrix::from_row_slice(3, 2, &[0.3, 0.3, 0.3, 0.3, 0.8, 0.1]);
        let j = joint_predictive(&xs, &y, &x, &spec, &priors).unwrap();
        assert_eq!(j.mean[0], j.mean[1]);
        assert!((j.scale[(0, 2)] - j.scale[(1, 2)]).abs() < 1e-14);
        // Off-diagonal carries only the latent part; diagonals add the nugget.
        assert!(j.scale[(0, 0)] > j.scale[(0, 1)]);
        assert!(factors(&j.scale));
    }

    fn factors(m: &DMatrix<f64>) -> bool {
        nalgebra::Cholesky::new(m.clone()).is_some()
    }

    #[test]
    fn zero_scale_draws_equal_mean() {
        let pred = PredictiveT {
            mean: DVector::from_vec(vec![1.0, -2.0]),
            scale: DMatrix::from_element(2, 2, 1e-14),
            dof: 5.0,
        };
        let d = sample_paths(&pred, 100, &mut rng::seeded(1)).unwrap();
        for r in 0..100 {
            assert!((d[(r, 0)] - 1.0).abs() < 1e-5);
            assert!((d[(r, 1)] + 2.0).abs() < 1e-5);
        }
    }

    #[test]
    fn median_of_draws_near_mean() {
        let pred = PredictiveT {
            mean: DVector::from_vec(vec![3.0]),
            scale: DMatrix::from_element(1, 1, 4.0),
            dof: 7.0,
        };
        let d = sample_paths(&pred, 100_000, &mut rng::seeded(2)).unwrap();
        let mut v: Vec<f64> = d.column(0).iter().copied().collect();
        v.sort_by(f64::total_cmp);
        let median = quantile_sorted(&v, 0.5);
        // SE of the median of a t₇ with scale 2: ≈ 1.2533·2.0·0.94/√n.
        let se = 1.2533 * 2.0 / (100_000f64).sqrt();
        assert!((median - 3.0).abs() < 3.0 * se);
    }

    #[test]
    fn indices_edge_cases() {
        let c = Chain::from_betas(&[vec![1.0, 2.0], vec![-1.0, -2.0]], 0.1).unwrap();
        let xs = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.3, 0.9]);
        let idx = posterior_indices(&xs, &c).unwrap();
        assert_eq!(idx.mean[0], 0.0);
        assert!(idx.mean[1].abs() < 1e-15);
        let one = Chain::from_betas(&[vec![1.0, 2.0]], 0.1).unwrap();
        let idx = posterior_indices(&xs, &one).unwrap();
        assert!((idx.samples[(0, 1)] - (0.3 + 1.8)).abs() < 1e-15);
    }

    #[test]
    fn mixture_of_one_and_two_identical() {
        let (x, y) = data();
        let model = Model::new(x, y, PriorSpec::default()).unwrap();
        let spec = KernelSpec::sim(vec![1.0, -0.5], 0.05).unwrap();
        let one = Chain::from_samples(crate::kernels::FamilyKind::Sim, 2, vec![spec.clone()], vec![0.0]).unwrap();
        let two = Chain::from_samples(
            crate::kernels::FamilyKind::Sim,
            2,
            vec![spec.clone(), spec.clone()],
            vec![0.0, 0.0],
        )
        .unwrap();
        let xs = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.1, 0.7]);
        let a = mixture_predict(&xs, &model, &one, &[0.05, 0.95], 3).unwrap();
        let b = mixture_predict(&xs, &model, &two, &[0.05, 0.95], 3).unwrap();
        let direct = Fitted::from_model(&model, &spec).unwrap().pointwise(&xs, Target::Response).unwrap();
        for i in 0..2 {
            assert!((a.mean[i] - direct.0[i]).abs() < 1e-14);
            assert!((a.mean[i] - b.mean[i]).abs() < 1e-14);
            assert!((a.sd[i] - b.sd[i]).abs() < 1e-14);
        }
    }
}
