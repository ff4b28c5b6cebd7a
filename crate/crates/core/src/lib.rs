//! Gaussian-process single-index models (GP-SIM) as emulators for computer
//! experiments.
//!
//! The single-index model `E[Y|x] = f(xᵀβ)` is fitted as an ordinary Gaussian
//! process with the rank-1 correlation `exp{-((xᵢ - xⱼ)ᵀβ)²}` plus a nugget.
//! The process variance is integrated out analytically, so MCMC only has to
//! move `β` and the nugget `η`. Predictions are Student-t kriging laws,
//! averaged over posterior samples.
//!
//! Modules, bottom-up:
//!
//! - [`kernels`]: SIM, separable and isotropic Gaussian correlations.
//! - [`posterior`]: priors and the σ²-marginalized log posterior.
//! - [`mcmc`]: Metropolis-within-Gibbs sampling, proposal adaptation, ESS.
//! - [`predict`]: Student-t kriging, sample paths, mixture summaries.
//! - [`postprocess`]: sign reconciliation and index point estimates.
//! - [`metrics`]: Mahalanobis distance, RMSE and comparison summaries.
//! - [`experiments`]: test functions, Latin hypercubes, comparison protocols.
//! - [`design`]: sequential-design scores (ALM and expected improvement).
//! - [`cli`]: the `gpsim` command-line driver.
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`
//! directory.

pub mod cli;
pub mod design;
pub mod error;
pub mod experiments;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod mcmc;
pub mod metrics;
pub mod posterior;
pub mod postprocess;
pub mod predict;
pub mod rng;

pub use error::{Error, Result};
pub use kernels::{CorrMatrix, Family, KernelSpec, ETA_FLOOR};
pub use mcmc::{Chain, McmcConfig};
pub use posterior::{BetaPrior, LengthScalePrior, PriorSpec};
pub use predict::PredictiveT;
