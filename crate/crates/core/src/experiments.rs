//! Test functions, designs and model-comparison protocols.
//!
//! Two synthetic problems are provided: a periodic single-index function of
//! four inputs, and the eight-input borehole function. Both feed the Monte
//! Carlo comparison, which repeatedly draws fresh training and test sets,
//! fits each model family by MCMC, and scores the posterior predictive by
//! √Mahalanobis distance. The inverted cross-validation protocol trains on
//! one small fold at a time and scores on everything else.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::FamilyKind;
use crate::mcmc::{adapt_proposal, run_chain, McmcConfig};
use crate::metrics::{sqrt_mahalanobis, ComparisonSummary};
use crate::posterior::{Model, PriorSpec};
use crate::predict::{mixture_moments, Target};
use crate::rng::{self, derive_seed};

/// Index vector of the sinusoid problem.
pub const SINUSOID_BETA: [f64; 4] = [2.85, 0.70, 0.99, -0.78];
/// Observation noise of the sinusoid problem.
pub const SINUSOID_NOISE_SD: f64 = 0.1;

/// `f(t) = sin(πt/5) + cos(4πt/5)/5`.
pub fn sinusoid_link(t: f64) -> f64 {
    (PI * t / 5.0).sin() + 0.2 * (4.0 * PI * t / 5.0).cos()
}

/// Affine map from physical bounds to the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCubeTransform {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl UnitCubeTransform {
    pub fn new(bounds: &[(f64, f64)]) -> Result<Self> {
        for (j, (lo, hi)) in bounds.iter().enumerate() {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "degenerate bounds ({lo}, {hi}) for column {}",
                    j + 1
                )));
            }
        }
        Ok(UnitCubeTransform {
            lo: bounds.iter().map(|b| b.0).collect(),
            hi: bounds.iter().map(|b| b.1).collect(),
        })
    }

    pub fn identity(p: usize) -> Self {
        UnitCubeTransform {
            lo: vec![0.0; p],
            hi: vec![1.0; p],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn forward(&self, raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if raw.ncols() != self.dim() {
            return Err(Error::dim("unit-cube transform", self.dim(), raw.ncols()));
        }
        Ok(DMatrix::from_fn(raw.nrows(), raw.ncols(), |i, j| {
            (raw[(i, j)] - self.lo[j]) / (self.hi[j] - self.lo[j])
        }))
    }

    pub fn inverse(&self, unit: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if unit.ncols() != self.dim() {
            return Err(Error::dim("unit-cube transform", self.dim(), unit.ncols()));
        }
        Ok(DMatrix::from_fn(unit.nrows(), unit.ncols(), |i, j| {
            self.lo[j] + unit[(i, j)] * (self.hi[j] - self.lo[j])
        }))
    }

    /// Drops the listed columns.
    pub fn without(&self, drop: &[usize]) -> Self {
        let keep = |j: &usize| !drop.contains(j);
        UnitCubeTransform {
            lo: (0..self.dim()).filter(keep).map(|j| self.lo[j]).collect(),
            hi: (0..self.dim()).filter(keep).map(|j| self.hi[j]).collect(),
        }
    }
}

/// Rescales each column of `raw` from `bounds` to `[0, 1]`.
pub fn scale_to_unit_cube(
    raw: &DMatrix<f64>,
    bounds: &[(f64, f64)],
) -> Result<(DMatrix<f64>, UnitCubeTransform)> {
    if bounds.len() != raw.ncols() {
        return Err(Error::dim("unit-cube bounds", raw.ncols(), bounds.len()));
    }
    let t = UnitCubeTransform::new(bounds)?;
    Ok((t.forward(raw)?, t))
}

/// Column-wise `(min, max)` of a matrix.
pub fn column_bounds(raw: &DMatrix<f64>) -> Vec<(f64, f64)> {
    (0..raw.ncols())
        .map(|j| {
            let c = raw.column(j);
            (c.min(), c.max())
        })
        .collect()
}

/// Unit-cube design, responses, and the map back to physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub transform: UnitCubeTransform,
    /// Noise-free responses, when the generator knows them.
    pub truth: Option<DVector<f64>>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Rows `idx` as a new dataset.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let x = DMatrix::from_fn(idx.len(), self.p(), |i, j| self.x[(idx[i], j)]);
        let y = DVector::from_fn(idx.len(), |i, _| self.y[idx[i]]);
        let truth = self
            .truth
            .as_ref()
            .map(|t| DVector::from_fn(idx.len(), |i, _| t[idx[i]]));
        Dataset {
            x,
            y,
            transform: self.transform.clone(),
            truth,
        }
    }

    /// Responses to score predictions against: noise-free when known.
    pub fn score_target(&self) -> &DVector<f64> {
        self.truth.as_ref().unwrap_or(&self.y)
    }
}

/// `n` uniform inputs in `[0,1]⁴` with sinusoid responses plus N(0, 0.1²) noise.
pub fn gen_sinusoid<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Dataset {
    gen_sinusoid_with(n, SINUSOID_NOISE_SD, rng)
}

pub fn gen_sinusoid_with<R: Rng + ?Sized>(n: usize, noise_sd: f64, rng: &mut R) -> Dataset {
    let p = SINUSOID_BETA.len();
    let x = DMatrix::from_fn(n, p, |_, _| rng.random::<f64>());
    let truth = DVector::from_fn(n, |i, _| {
        let t: f64 = (0..p).map(|j| x[(i, j)] * SINUSOID_BETA[j]).sum();
        sinusoid_link(t)
    });
    let y = if noise_sd > 0.0 {
        let noise = Normal::new(0.0, noise_sd).expect("positive sd");
        truth.map(|v| v + noise.sample(rng))
    } else {
        truth.clone()
    };
    Dataset {
        x,
        y,
        transform: UnitCubeTransform::identity(p),
        truth: Some(truth),
    }
}

/// Input names of the borehole function, in argument order.
pub const BOREHOLE_NAMES: [&str; 8] = ["r_w", "r", "T_u", "T_l", "H_u", "H_l", "L", "K_w"];

/// Physical input rectangle of the borehole function.
pub const BOREHOLE_BOUNDS: [(f64, f64); 8] = [
    (0.05, 0.15),
    (100.0, 5000.0),
    (63070.0, 115600.0),
    (63.1, 116.0),
    (990.0, 1110.0),
    (700.0, 820.0),
    (1120.0, 1680.0),
    (9855.0, 12045.0),
];

/// How strictly [`borehole`] polices its input rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangeCheck {
    #[default]
    Strict,
    Warn,
}

/// Water flow through a borehole, in physical units
/// `(r_w, r, T_u, T_l, H_u, H_l, L, K_w)`.
pub fn borehole(x: &[f64], check: RangeCheck) -> Result<f64> {
    if x.len() != 8 {
        return Err(Error::dim("borehole input", 8, x.len()));
    }
    for (j, (lo, hi)) in BOREHOLE_BOUNDS.iter().enumerate() {
        let tol = 1e-9 * (hi - lo);
        if x[j] < lo - tol || x[j] > hi + tol {
            let msg = format!("{} = {} outside [{lo}, {hi}]", BOREHOLE_NAMES[j], x[j]);
            match check {
                RangeCheck::Strict => return Err(Error::InvalidParameter(msg)),
                RangeCheck::Warn => log::warn!("{msg}"),
            }
        }
    }
    let [rw, r, tu, tl, hu, hl, l, kw] = [x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]];
    if !(r > rw) || rw <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "borehole needs r > r_w > 0, got r = {r}, r_w = {rw}"
        )));
    }
    let log_ratio = (r / rw).ln();
    let denom = log_ratio * (1.0 + 2.0 * l * tu / (log_ratio * rw * rw * kw) + tu / tl);
    Ok(2.0 * PI * tu * (hu - hl) / denom)
}

/// Latin hypercube: each column hits every stratum `[(k−1)/n, k/n)` once,
/// with a uniform position inside the stratum and an independent random
/// order per column.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, p);
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..p {
        perm.shuffle(rng);
        for (i, k) in perm.iter().enumerate() {
            let u: f64 = rng.random();
            x[(i, j)] = ((*k as f64 + u) / n as f64).min(f64::from_bits(1f64.to_bits() - 1));
        }
    }
    x
}

/// Borehole responses on an `n`-point Latin hypercube over the input
/// rectangle. Columns in `drop` are removed from the returned design after
/// the responses are computed.
pub fn gen_borehole<R: Rng + ?Sized>(n: usize, drop: &[usize], rng: &mut R) -> Result<Dataset> {
    let unit = latin_hypercube(n, 8, rng);
    let t = UnitCubeTransform::new(&BOREHOLE_BOUNDS)?;
    let raw = t.inverse(&unit)?;
    let y = DVector::from_iterator(
        n,
        (0..n)
            .map(|i| {
                let row: Vec<f64> = raw.row(i).iter().copied().collect();
                borehole(&row, RangeCheck::Strict)
            })
            .collect::<Result<Vec<_>>>()?,
    );
    let keep: Vec<usize> = (0..8).filter(|j| !drop.contains(j)).collect();
    let x = DMatrix::from_fn(n, keep.len(), |i, j| unit[(i, keep[j])]);
    Ok(Dataset {
        x,
        y: y.clone(),
        transform: t.without(drop),
        truth: Some(y),
    })
}

/// Maps borehole input names to column indices.
pub fn borehole_columns(names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            BOREHOLE_NAMES
                .iter()
                .position(|b| b == n)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown borehole input `{n}`")))
        })
        .collect()
}

/// Data source for a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    Sinusoid {
        #[serde(default = "default_noise")]
        noise_sd: f64,
    },
    Borehole {
        #[serde(default)]
        drop_columns: Vec<String>,
    },
    /// Rows of an external dataset, resampled per replicate.
    #[serde(skip)]
    External(Dataset),
}

fn default_noise() -> f64 {
    SINUSOID_NOISE_SD
}

/// Settings for [`monte_carlo_compare`] and [`inverted_cv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: Generator,
    pub n_train: usize,
    pub n_test: usize,
    /// Replicates (Monte Carlo) or random partitions (inverted CV).
    pub n_reps: usize,
    pub methods: Vec<FamilyKind>,
    pub mcmc: McmcConfig,
    pub priors: PriorSpec,
    pub seed: u64,
    /// Chain samples used for the predictive moments, evenly spaced over the
    /// stored chain. `None` uses every sample.
    pub predict_samples: Option<usize>,
    /// Length of a SIM pilot run whose adapted covariance becomes the β
    /// proposal for every replicate. `None` skips the pilot.
    pub pilot_iters: Option<usize>,
    /// Adaptation rounds the pilot budget is split into.
    pub pilot_rounds: usize,
    pub target: Target,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generator: Generator::Sinusoid {
                noise_sd: SINUSOID_NOISE_SD,
            },
            n_train: 45,
            n_test: 200,
            n_reps: 20,
            methods: vec![FamilyKind::Isotropic, FamilyKind::Separable, FamilyKind::Sim],
            mcmc: McmcConfig::default(),
            priors: PriorSpec::default(),
            seed: 1,
            predict_samples: Some(250),
            pilot_iters: None,
            pilot_rounds: 4,
            target: Target::Response,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(Error::InvalidParameter("n_reps must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods selected".into()));
        }
        if self.n_train < 2 || self.n_test == 0 {
            return Err(Error::InvalidParameter(
                "need at least two training and one test point".into(),
            ));
        }
        if self.predict_samples == Some(0) {
            return Err(Error::InvalidParameter("predict_samples must be positive".into()));
        }
        self.priors.validate()
    }

    /// Train and test sets for replicate `rep`.
    pub fn draw_replicate(&self, rep: usize) -> Result<(Dataset, Dataset)> {
        let mut r = rng::substream(derive_seed(self.seed, rep as u64), 0);
        match &self.generator {
            Generator::Sinusoid { noise_sd } => Ok((
                gen_sinusoid_with(self.n_train, *noise_sd, &mut r),
                gen_sinusoid_with(self.n_test, *noise_sd, &mut r),
            )),
            Generator::Borehole { drop_columns } => {
                let drop = borehole_columns(drop_columns)?;
                Ok((
                    gen_borehole(self.n_train, &drop, &mut r)?,
                    gen_borehole(self.n_test, &drop, &mut r)?,
                ))
            }
            Generator::External(data) => {
                if self.n_train + self.n_test > data.n() {
                    return Err(Error::InsufficientData(format!(
                        "{} rows cannot supply {} training and {} test rows",
                        data.n(),
                        self.n_train,
                        self.n_test
                    )));
                }
                let mut idx: Vec<usize> = (0..data.n()).collect();
                idx.shuffle(&mut r);
                Ok((
                    data.subset(&idx[..self.n_train]),
                    data.subset(&idx[self.n_train..self.n_train + self.n_test]),
                ))
            }
        }
    }
}

/// Fits `kind` to `train` and returns √Mahalanobis of `test_y` under the
/// posterior predictive mixture at `test_x`.
pub fn fit_and_score(
    train: &Dataset,
    test_x: &DMatrix<f64>,
    test_y: &DVector<f64>,
    kind: FamilyKind,
    mcmc: &McmcConfig,
    priors: &PriorSpec,
    predict_samples: Option<usize>,
    target: Target,
) -> Result<f64> {
    let model = Model::new(train.x.clone(), train.y.clone(), priors.clone())?;
    let chain = run_chain(&model, kind, mcmc)?;
    let chain = match predict_samples {
        Some(k) => chain.subsample(k),
        None => chain,
    };
    let (mean, cov) = mixture_moments(test_x, &model, &chain, target)?;
    sqrt_mahalanobis(test_y, &mean, &cov)
}

fn method_mcmc(base: &McmcConfig, seed: u64, kind: FamilyKind, pilot: Option<&Vec<Vec<f64>>>) -> McmcConfig {
    let mut cfg = base.clone();
    cfg.seed = seed;
    if kind == FamilyKind::Sim {
        if let Some(cov) = pilot {
            cfg.sigma_beta = Some(cov.clone());
        }
    }
    cfg
}

/// Runs the SIM pilot on its own draw of training data and returns the
/// adapted β proposal covariance.
///
/// The pilot budget is split into `pilot_rounds` legs. Each leg starts where
/// the previous one stopped and proposes with the covariance adapted from it,
/// so a default proposal that barely moves on a sharp posterior still ends
/// with a usable estimate.
fn pilot_covariance(config: &ExperimentConfig) -> Result<Option<Vec<Vec<f64>>>> {
    let Some(iters) = config.pilot_iters else {
        return Ok(None);
    };
    if !config.methods.contains(&FamilyKind::Sim) {
        return Ok(None);
    }
    let (train, _) = config.draw_replicate(usize::MAX)?;
    let model = Model::new(train.x.clone(), train.y.clone(), config.priors.clone())?;
    let rounds = config.pilot_rounds.max(1);
    let leg = (iters / rounds).max(1);
    let mut cfg = McmcConfig {
        n_iter: leg,
        burn_in: leg / 5,
        thin: 1,
        ..config.mcmc.clone()
    };
    let mut cov = None;
    for r in 0..rounds {
        cfg.seed = derive_seed(derive_seed(config.seed, u64::MAX), r as u64);
        let chain = run_chain(&model, FamilyKind::Sim, &cfg)?;
        let adapted = adapt_proposal(&chain)?;
        let p = adapted.cov.nrows();
        let rows: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| adapted.cov[(i, j)]).collect()).collect();
        log::debug!("pilot round {r}: beta acceptance {:.3}", chain.accept_main);
        cfg.sigma_beta = Some(rows.clone());
        cfg.beta_init = chain.betas()?.last().cloned();
        cfg.eta_init = chain.etas().last().copied().unwrap_or(cfg.eta_init);
        cov = Some(rows);
    }
    Ok(cov)
}

/// Monte Carlo comparison of model families.
///
/// Each replicate draws fresh training and test sets, fits every method by
/// MCMC and records √Mahalanobis of the test responses. Failed fits are
/// logged and excluded; their replicate indices are reported.
pub fn monte_carlo_compare(config: &ExperimentConfig) -> Result<ComparisonSummary> {
    config.validate()?;
    let pilot = pilot_covariance(config)?;
    let per_rep: Vec<Vec<Result<f64>>> = (0..config.n_reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(config.seed, rep as u64);
            let (train, test) = match config.draw_replicate(rep) {
                Ok(d) => d,
                Err(e) => {
                    let msg = e.to_string();
                    return config
                        .methods
                        .iter()
                        .map(|_| Err(Error::InsufficientData(msg.clone())))
                        .collect();
                }
            };
            config
                .methods
                .iter()
                .enumerate()
                .map(|(m, kind)| {
                    let mcmc = method_mcmc(&config.mcmc, derive_seed(rep_seed, m as u64 + 1), *kind, pilot.as_ref());
                    fit_and_score(
                        &train,
                        &test.x,
                        test.score_target(),
                        *kind,
                        &mcmc,
                        &config.priors,
                        config.predict_samples,
                        config.target,
                    )
                })
                .collect()
        })
        .collect();
    Ok(collect_summary(&config.methods, per_rep))
}

fn collect_summary(methods: &[FamilyKind], per_rep: Vec<Vec<Result<f64>>>) -> ComparisonSummary {
    let mut out = ComparisonSummary {
        methods: methods.iter().map(|m| m.label().to_string()).collect(),
        distances: vec![Vec::new(); methods.len()],
        failures: vec![Vec::new(); methods.len()],
    };
    for (rep, results) in per_rep.into_iter().enumerate() {
        for (m, r) in results.into_iter().enumerate() {
            match r {
                Ok(d) => out.distances[m].push(d),
                Err(e) => {
                    log::warn!("replicate {rep}, method {}: {e}", methods[m]);
                    out.failures[m].push(rep);
                }
            }
        }
    }
    out
}

/// Random partition of `0..n` into `k` folds of near-equal size.
pub fn random_folds<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut folds = vec![Vec::new(); k];
    for (i, v) in idx.into_iter().enumerate() {
        folds[i % k].push(v);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Inverted cross-validation: train on each of `k` folds in turn and score
/// the predictive on the complement (against noise-free values when the
/// dataset carries them). `config.n_reps` random partitions are
/// used, giving `k · n_reps` distances per method in partition-major order.
pub fn inverted_cv(data: &Dataset, k: usize, config: &ExperimentConfig) -> Result<ComparisonSummary> {
    if config.methods.is_empty() || config.n_reps == 0 {
        return Err(Error::InvalidParameter("need at least one method and partition".into()));
    }
    if k < 2 {
        return Err(Error::InvalidParameter("inverted CV needs k >= 2".into()));
    }
    if data.n() < 2 * k {
        return Err(Error::InsufficientData(format!(
            "{} rows cannot fill {k} folds of at least two",
            data.n()
        )));
    }
    config.priors.validate()?;
    let jobs: Vec<(usize, usize)> = (0..config.n_reps)
        .flat_map(|rep| (0..k).map(move |f| (rep, f)))
        .collect();
    let partitions: Vec<Vec<Vec<usize>>> = (0..config.n_reps)
        .map(|rep| {
            let mut r = rng::substream(derive_seed(config.seed, rep as u64), 1);
            random_folds(data.n(), k, &mut r)
        })
        .collect();
    let per_job: Vec<Vec<Result<f64>>> = jobs
        .par_iter()
        .map(|&(rep, f)| {
            let fold = &partitions[rep][f];
            let rest: Vec<usize> = (0..data.n()).filter(|i| fold.binary_search(i).is_err()).collect();
            let train = data.subset(fold);
            let test = data.subset(&rest);
            let job_seed = derive_seed(derive_seed(config.seed, rep as u64), f as u64 + 1);
            config
                .methods
                .iter()
                .enumerate()
                .map(|(m, kind)| {
                    let mcmc = method_mcmc(&config.mcmc, derive_seed(job_seed, m as u64), *kind, None);
                    fit_and_score(
                        &train,
                        &test.x,
                        test.score_target(),
                        *kind,
                        &mcmc,
                        &config.priors,
                        config.predict_samples,
                        config.target,
                    )
                })
                .collect()
        })
        .collect();
    Ok(collect_summary(&config.methods, per_job))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_values() {
        assert!((sinusoid_link(0.0) - 0.2).abs() < 1e-15);
        assert!((sinusoid_link(2.5) - 1.2).abs() < 1e-15);
        assert!((sinusoid_link(5.0) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn noiseless_sinusoid() {
        let d = gen_sinusoid_with(50, 0.0, &mut rng::seeded(1));
        assert_eq!(&d.y, d.truth.as_ref().unwrap());
        assert!(d.x.iter().all(|v| (0.0..1.0).contains(v)));
        let zero = [0.0; 4];
        let t: f64 = zero.iter().zip(SINUSOID_BETA).map(|(a, b)| a * b).sum();
        assert!((sinusoid_link(t) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn sinusoid_noise_level() {
        let d = gen_sinusoid(100_000, &mut rng::seeded(2));
        let resid: Vec<f64> = d.y.iter().zip(d.truth.unwrap().iter()).map(|(a, b)| a - b).collect();
        let m = resid.iter().sum::<f64>() / resid.len() as f64;
        let sd = (resid.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (resid.len() - 1) as f64).sqrt();
        assert!((sd / 0.1 - 1.0).abs() < 0.02);
    }

    #[test]
    fn borehole_midpoint() {
        // Midpoint of the input rectangle, evaluated independently in
        // double precision.
        let x = [0.10, 2550.0, 89335.0, 89.55, 1050.0, 760.0, 1400.0, 10950.0];
        let y = borehole(&x, RangeCheck::Strict).unwrap();
        assert!((y - 70.943_386_542_344_17).abs() < 1e-9, "{y}");
    }

    #[test]
    fn borehole_head_difference_is_linear() {
        let a = [0.10, 2550.0, 89335.0, 89.55, 1000.0, 800.0, 1400.0, 10950.0];
        let b = [0.10, 2550.0, 89335.0, 89.55, 1100.0, 700.0, 1400.0, 10950.0];
        let ya = borehole(&a, RangeCheck::Strict).unwrap();
        let yb = borehole(&b, RangeCheck::Strict).unwrap();
        assert!((yb - 2.0 * ya).abs() < 1e-9 * yb);
    }

    #[test]
    fn borehole_range_checks() {
        let mut x = [0.10, 2550.0, 89335.0, 89.55, 1050.0, 760.0, 1400.0, 10950.0];
        x[0] = 0.2;
        assert!(borehole(&x, RangeCheck::Strict).is_err());
        assert!(borehole(&x, RangeCheck::Warn).is_ok());
        x[0] = 0.1;
        x[1] = 0.05;
        assert!(borehole(&x, RangeCheck::Warn).is_err());
    }

    #[test]
    fn lhd_strata() {
        let mut r = rng::seeded(5);
        for (n, p) in [(1, 3), (4, 2), (17, 5)] {
            let x = latin_hypercube(n, p, &mut r);
            for j in 0..p {
                let mut strata: Vec<usize> = x.column(j).iter().map(|v| (v * n as f64).floor() as usize).collect();
                strata.sort_unstable();
                assert_eq!(strata, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn unit_cube_round_trip() {
        let raw = DMatrix::from_row_slice(2, 2, &[1.0, 10.0, 3.0, 20.0]);
        let (x, t) = scale_to_unit_cube(&raw, &[(1.0, 3.0), (10.0, 20.0)]).unwrap();
        assert_eq!(x, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]));
        assert!((t.inverse(&x).unwrap() - raw).abs().max() < 1e-12);
        assert!(scale_to_unit_cube(&DMatrix::zeros(1, 1), &[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn borehole_midpoint_maps_to_half() {
        let t = UnitCubeTransform::new(&BOREHOLE_BOUNDS).unwrap();
        let mid = DMatrix::from_fn(1, 8, |_, j| 0.5 * (BOREHOLE_BOUNDS[j].0 + BOREHOLE_BOUNDS[j].1));
        let u = t.forward(&mid).unwrap();
        assert!(u.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn borehole_design_positive() {
        let d = gen_borehole(250, &[], &mut rng::seeded(6)).unwrap();
        assert!(d.y.iter().all(|v| v.is_finite() && *v > 0.0));
        let raw = d.transform.inverse(&d.x).unwrap();
        for i in 0..raw.nrows() {
            for (j, (lo, hi)) in BOREHOLE_BOUNDS.iter().enumerate() {
                assert!(raw[(i, j)] >= *lo - 1e-9 && raw[(i, j)] <= *hi + 1e-9);
            }
        }
    }

    #[test]
    fn folds_partition() {
        let f = random_folds(23, 5, &mut rng::seeded(3));
        let mut all: Vec<usize> = f.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(f.iter().all(|g| g.len() == 4 || g.len() == 5));
        assert_eq!(f, random_folds(23, 5, &mut rng::seeded(3)));
    }
}
