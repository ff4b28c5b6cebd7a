//! Gaussian correlation families and correlation-matrix construction.
//!
//! All three families are the squared-exponential kernel applied to a linear
//! feature map of the inputs:
//!
//! - SIM: `exp{-((xᵢ - xⱼ)ᵀβ)²}`, i.e. a rank-1 inverse length-scale matrix
//!   `ββᵀ`. The feature map is the scalar index `xᵀβ`.
//! - Separable: `exp{-Σₖ (xᵢₖ - xⱼₖ)²/θₖ}`. Features are `xₖ/√θₖ`.
//! - Isotropic: the separable kernel with one shared `θ`.
//!
//! The nugget `η` is added on the diagonal of training correlation matrices,
//! and to a cross-correlation only when the prediction point is bitwise equal
//! to the training row.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::linalg;

/// Smallest admissible nugget. Keeps correlation matrices positive definite
/// even for deterministic responses and duplicated design rows.
pub const ETA_FLOOR: f64 = 1e-8;

/// Which correlation family, without parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FamilyKind {
    #[default]
    #[serde(rename = "sim")]
    Sim,
    #[serde(rename = "sep", alias = "separable")]
    Separable,
    #[serde(rename = "iso", alias = "isotropic")]
    Isotropic,
}

impl FamilyKind {
    /// Short method label used in benchmark tables.
    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::Sim => "sim",
            FamilyKind::Separable => "sep",
            FamilyKind::Isotropic => "iso",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "sim" => Some(FamilyKind::Sim),
            "sep" | "separable" => Some(FamilyKind::Separable),
            "iso" | "isotropic" => Some(FamilyKind::Isotropic),
            _ => None,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Correlation family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Index vector; unconstrained in sign and norm. All-zero is legal.
    Sim { beta: Vec<f64> },
    /// One positive length-scale per input.
    Separable { theta: Vec<f64> },
    /// One positive length-scale shared by all inputs.
    Isotropic { theta: f64 },
}

/// A correlation family plus nugget. Fully determines a correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: Family,
    pub eta: f64,
}

impl KernelSpec {
    pub fn sim(beta: Vec<f64>, eta: f64) -> Result<Self> {
        let spec = KernelSpec {
            family: Family::Sim { beta },
            eta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn separable(theta: Vec<f64>, eta: f64) -> Result<Self> {
        let spec = KernelSpec {
            family: Family::Separable { theta },
            eta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn isotropic(theta: f64, eta: f64) -> Result<Self> {
        let spec = KernelSpec {
            family: Family::Isotropic { theta },
            eta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= ETA_FLOOR) || !self.eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "nugget {} is below the floor {ETA_FLOOR:e}",
                self.eta
            )));
        }
        match &self.family {
            Family::Sim { beta } => {
                if beta.iter().any(|b| !b.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite index vector".into()));
                }
            }
            Family::Separable { theta } => {
                if let Some(t) = theta.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "length-scale {t} must be positive"
                    )));
                }
            }
            Family::Isotropic { theta } => {
                if !(*theta > 0.0) || !theta.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "length-scale {theta} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::Sim { .. } => FamilyKind::Sim,
            Family::Separable { .. } => FamilyKind::Separable,
            Family::Isotropic { .. } => FamilyKind::Isotropic,
        }
    }

    /// Input dimension implied by the parameters; `None` for isotropic.
    pub fn dim(&self) -> Option<usize> {
        match &self.family {
            Family::Sim { beta } => Some(beta.len()),
            Family::Separable { theta } => Some(theta.len()),
            Family::Isotropic { .. } => None,
        }
    }

    /// The family's parameter vector (β, θ, or the single θ).
    pub fn params(&self) -> Vec<f64> {
        match &self.family {
            Family::Sim { beta } => beta.clone(),
            Family::Separable { theta } => theta.clone(),
            Family::Isotropic { theta } => vec![*theta],
        }
    }

    pub fn beta(&self) -> Option<&[f64]> {
        match &self.family {
            Family::Sim { beta } => Some(beta),
            _ => None,
        }
    }

    /// Same kind, new parameters.
    pub fn with_params(&self, params: Vec<f64>, eta: f64) -> KernelSpec {
        let family = match self.family {
            Family::Sim { .. } => Family::Sim { beta: params },
            Family::Separable { .. } => Family::Separable { theta: params },
            Family::Isotropic { .. } => Family::Isotropic { theta: params[0] },
        };
        KernelSpec { family, eta }
    }

    fn check_dim(&self, p: usize, context: &'static str) -> Result<()> {
        match self.dim() {
            Some(d) if d != p => Err(Error::dim(context, d, p)),
            _ => Ok(()),
        }
    }

    /// Correlation between two points, without the nugget.
    pub fn corr(&self, xi: &[f64], xj: &[f64]) -> Result<f64> {
        match &self.family {
            Family::Sim { beta } => sim_corr(xi, xj, beta),
            Family::Separable { theta } => anisotropic_corr(xi, xj, theta),
            Family::Isotropic { theta } => {
                if xi.len() != xj.len() {
                    return Err(Error::dim("isotropic correlation", xi.len(), xj.len()));
                }
                anisotropic_corr(xi, xj, &vec![*theta; xi.len()])
            }
        }
    }

    /// Maps rows of `x` into the space where the kernel is `exp(-‖·‖²)`.
    pub(crate) fn features(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.family {
            Family::Sim { beta } => x * DMatrix::from_column_slice(beta.len(), 1, beta),
            Family::Separable { theta } => {
                let mut f = x.clone();
                for (k, t) in theta.iter().enumerate() {
                    f.column_mut(k).scale_mut(1.0 / t.sqrt());
                }
                f
            }
            Family::Isotropic { theta } => x / theta.sqrt(),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Sim { beta } => write!(f, "sim(beta={beta:?}, eta={:e})", self.eta),
            Family::Separable { theta } => {
                write!(f, "separable(theta={theta:?}, eta={:e})", self.eta)
            }
            Family::Isotropic { theta } => {
                write!(f, "isotropic(theta={theta}, eta={:e})", self.eta)
            }
        }
    }
}

/// Rank-1 SIM correlation `exp{-((xi - xj)ᵀβ)²}`.
pub fn sim_corr(xi: &[f64], xj: &[f64], beta: &[f64]) -> Result<f64> {
    if xi.len() != beta.len() {
        return Err(Error::dim("sim correlation", beta.len(), xi.len()));
    }
    if xj.len() != beta.len() {
        return Err(Error::dim("sim correlation", beta.len(), xj.len()));
    }
    let proj: f64 = xi
        .iter()
        .zip(xj)
        .zip(beta)
        .map(|((a, b), w)| (a - b) * w)
        .sum();
    Ok((-proj * proj).exp())
}

/// Separable Gaussian correlation `exp{-Σₖ (xiₖ - xjₖ)²/θₖ}`.
pub fn anisotropic_corr(xi: &[f64], xj: &[f64], theta: &[f64]) -> Result<f64> {
    if xi.len() != theta.len() {
        return Err(Error::dim("separable correlation", theta.len(), xi.len()));
    }
    if xj.len() != theta.len() {
        return Err(Error::dim("separable correlation", theta.len(), xj.len()));
    }
    if let Some(t) = theta.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "length-scale {t} must be positive"
        )));
    }
    let d: f64 = xi
        .iter()
        .zip(xj)
        .zip(theta)
        .map(|((a, b), t)| (a - b) * (a - b) / t)
        .sum();
    Ok((-d).exp())
}

/// Squared Euclidean distances between rows of `a` and rows of `b`.
fn sq_dists(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), b.nrows());
    for j in 0..b.nrows() {
        for i in 0..a.nrows() {
            let mut s = 0.0;
            for k in 0..a.ncols() {
                let diff = a[(i, k)] - b[(j, k)];
                s += diff * diff;
            }
            d[(i, j)] = s;
        }
    }
    d
}

/// A nugget-augmented correlation matrix with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct CorrMatrix {
    entries: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    logdet: f64,
    jitter: f64,
}

impl CorrMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }

    /// log |K|, of the jittered matrix if jitter was needed.
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    /// Diagonal jitter added to obtain the factorization (usually 0).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    /// `bᵀ K⁻¹ b` via a triangular solve.
    pub fn quad_form(&self, b: &DVector<f64>) -> f64 {
        let v = linalg::solve_lower_vec(&self.chol, b);
        v.norm_squared()
    }

    /// Factorizes an arbitrary symmetric matrix with the usual jitter policy.
    pub fn from_entries(entries: DMatrix<f64>, what: impl FnOnce() -> String) -> Result<Self> {
        match linalg::cholesky_with_jitter(&entries) {
            Some((chol, jitter)) => {
                let logdet = linalg::log_det(&chol);
                Ok(CorrMatrix {
                    entries,
                    chol,
                    logdet,
                    jitter,
                })
            }
            None => Err(Error::Singular {
                spec: what(),
                max_jitter: linalg::JITTER_MAX,
            }),
        }
    }
}

fn warn_outside_unit_cube(x: &DMatrix<f64>) {
    let tol = 1e-12;
    if x.iter().any(|v| *v < -tol || *v > 1.0 + tol) {
        log::warn!("design has entries outside [0,1]; priors assume unit-cube inputs");
    }
}

/// Correlation matrix of the rows of `x` under `spec`, nugget on the diagonal.
pub fn build_corr_matrix(x: &DMatrix<f64>, spec: &KernelSpec) -> Result<CorrMatrix> {
    if x.nrows() == 0 {
        return Err(Error::InsufficientData("design has no rows".into()));
    }
    spec.check_dim(x.ncols(), "correlation matrix")?;
    spec.validate()?;
    warn_outside_unit_cube(x);
    let f = spec.features(x);
    let n = x.nrows();
    let mut k = DMatrix::zeros(n, n);
    for j in 0..n {
        k[(j, j)] = 1.0 + spec.eta;
        for i in (j + 1)..n {
            let mut s = 0.0;
            for c in 0..f.ncols() {
                let d = f[(i, c)] - f[(j, c)];
                s += d * d;
            }
            let v = (-s).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    CorrMatrix::from_entries(k, || spec.to_string())
}

fn rows_equal(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> bool {
    (0..a.ncols()).all(|k| a[(i, k)].to_bits() == b[(j, k)].to_bits())
}

/// Correlations between `xstar` and each training row.
///
/// The nugget is added to component `i` only when `xstar` is bitwise equal
/// to row `i` of `x`.
pub fn cross_corr(xstar: &[f64], x: &DMatrix<f64>, spec: &KernelSpec) -> Result<DVector<f64>> {
    if xstar.len() != x.ncols() {
        return Err(Error::dim("cross correlation", x.ncols(), xstar.len()));
    }
    let xs = DMatrix::from_row_slice(1, xstar.len(), xstar);
    let k = cross_corr_matrix(&xs, x, spec, true)?;
    Ok(k.row(0).transpose())
}

/// `N×n` cross-correlations between rows of `xstar` and rows of `x`.
///
/// With `nugget` set, entries whose rows are bitwise identical get `+η`.
pub fn cross_corr_matrix(
    xstar: &DMatrix<f64>,
    x: &DMatrix<f64>,
    spec: &KernelSpec,
    nugget: bool,
) -> Result<DMatrix<f64>> {
    if xstar.ncols() != x.ncols() {
        return Err(Error::dim("cross correlation", x.ncols(), xstar.ncols()));
    }
    spec.check_dim(x.ncols(), "cross correlation")?;
    let fs = spec.features(xstar);
    let fx = spec.features(x);
    let mut k = sq_dists(&fs, &fx);
    k.apply(|v| *v = (-*v).exp());
    if nugget {
        for i in 0..xstar.nrows() {
            for j in 0..x.nrows() {
                if rows_equal(xstar, i, x, j) {
                    k[(i, j)] += spec.eta;
                }
            }
        }
    }
    Ok(k)
}

/// `N×N` correlations among prediction points, `+η` on the diagonal when
/// `nugget` is set.
pub fn self_corr_matrix(xstar: &DMatrix<f64>, spec: &KernelSpec, nugget: bool) -> Result<DMatrix<f64>> {
    spec.check_dim(xstar.ncols(), "prediction correlation")?;
    let f = spec.features(xstar);
    let mut k = sq_dists(&f, &f);
    k.apply(|v| *v = (-*v).exp());
    if nugget {
        for i in 0..k.nrows() {
            k[(i, i)] += spec.eta;
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SINUSOID_INDEX: [f64; 4] = [2.85, 0.70, 0.99, -0.78];

    #[test]
    fn sim_corr_zero_distance_and_zero_beta() {
        let x = [0.3, 0.1, 0.9, 0.2];
        assert_eq!(sim_corr(&x, &x, &SINUSOID_INDEX).unwrap(), 1.0);
        let y = [0.7, 0.5, 0.0, 1.0];
        assert_eq!(sim_corr(&x, &y, &[0.0; 4]).unwrap(), 1.0);
    }

    #[test]
    fn sim_corr_unit_step_along_first_axis() {
        let xi = [1.0, 0.0, 0.0, 0.0];
        let xj = [0.0; 4];
        let v = sim_corr(&xi, &xj, &SINUSOID_INDEX).unwrap();
        assert_relative_eq!(v, (-2.85f64 * 2.85).exp(), max_relative = 1e-14);
        assert_relative_eq!(v, 2.9679e-4, max_relative = 1e-4);
    }

    #[test]
    fn sim_corr_dimension_mismatch() {
        assert!(matches!(
            sim_corr(&[0.0, 1.0], &[0.0, 1.0], &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn anisotropic_examples() {
        let v = anisotropic_corr(&[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(v, (-2.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(v, 0.13534, max_relative = 1e-4);
        assert_eq!(anisotropic_corr(&[0.4], &[0.4], &[0.3]).unwrap(), 1.0);
        let flat = anisotropic_corr(&[0.0, 0.0], &[1.0, 1.0], &[1e12, 1e12]).unwrap();
        assert!((flat - 1.0).abs() < 1e-9);
        assert!(anisotropic_corr(&[0.0], &[1.0], &[0.0]).is_err());
        assert!(anisotropic_corr(&[0.0], &[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn one_by_one_matrix() {
        let x = DMatrix::from_row_slice(1, 2, &[0.2, 0.8]);
        let spec = KernelSpec::sim(vec![1.0, -1.0], 0.25).unwrap();
        let k = build_corr_matrix(&x, &spec).unwrap();
        assert_eq!(k.entries()[(0, 0)], 1.25);
        assert_relative_eq!(k.logdet(), 1.25f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn duplicate_rows_need_nugget() {
        let x = DMatrix::from_row_slice(2, 2, &[0.3, 0.3, 0.3, 0.3]);
        let spec = KernelSpec::sim(vec![1.0, 2.0], 0.1).unwrap();
        let k = build_corr_matrix(&x, &spec).unwrap();
        assert_eq!(k.entries()[(0, 1)], 1.0);
        assert_eq!(k.entries()[(0, 0)], 1.1);
        assert_eq!(k.jitter(), 0.0);
        // Without a nugget the rank-one matrix only factors thanks to jitter.
        let bare = KernelSpec {
            family: Family::Sim { beta: vec![1.0, 2.0] },
            eta: ETA_FLOOR,
        };
        let k = build_corr_matrix(&x, &bare).unwrap();
        assert!(k.entries()[(0, 0)] - 1.0 <= 2.0 * ETA_FLOOR);
    }

    #[test]
    fn separable_matrix_matches_entrywise() {
        let x = DMatrix::from_row_slice(3, 2, &[0.1, 0.2, 0.5, 0.9, 0.8, 0.4]);
        let spec = KernelSpec::separable(vec![1.0, 1.0], 0.1).unwrap();
        let k = build_corr_matrix(&x, &spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let xi: Vec<f64> = x.row(i).iter().copied().collect();
                let xj: Vec<f64> = x.row(j).iter().copied().collect();
                let d2: f64 = xi.iter().zip(&xj).map(|(a, b)| (a - b) * (a - b)).sum();
                let expect = (-d2).exp() + if i == j { 0.1 } else { 0.0 };
                assert!((k.entries()[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cross_corr_cases() {
        let x = DMatrix::from_row_slice(3, 2, &[0.1, 0.2, 0.5, 0.9, 0.8, 0.4]);
        let spec = KernelSpec::sim(vec![1.5, -0.5], ETA_FLOOR).unwrap();
        let k = cross_corr(&[0.1, 0.2], &x, &spec).unwrap();
        assert!((k[0] - 1.0).abs() <= 2.0 * ETA_FLOOR);

        let zero = KernelSpec::sim(vec![0.0, 0.0], 0.3).unwrap();
        let k = cross_corr(&[0.7, 0.7], &x, &zero).unwrap();
        assert!(k.iter().all(|v| *v == 1.0));

        let spec = KernelSpec::separable(vec![0.5, 2.0], 0.2).unwrap();
        let xs = [0.33, 0.61];
        let k = cross_corr(&xs, &x, &spec).unwrap();
        for i in 0..3 {
            let xi: Vec<f64> = x.row(i).iter().copied().collect();
            let direct = anisotropic_corr(&xs, &xi, &[0.5, 2.0]).unwrap();
            assert!((k[i] - direct).abs() < 1e-14);
        }
        assert!(cross_corr(&[0.1], &x, &spec).is_err());
    }

    #[test]
    fn nugget_floor_enforced() {
        assert!(KernelSpec::sim(vec![1.0], 0.0).is_err());
        assert!(KernelSpec::separable(vec![1.0, 0.0], 0.1).is_err());
        assert!(KernelSpec::isotropic(-1.0, 0.1).is_err());
    }

    fn unit_rows(n: usize, p: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(0.0f64..1.0, n * p)
            .prop_map(move |v| DMatrix::from_row_slice(n, p, &v))
    }

    fn any_spec(p: usize) -> impl Strategy<Value = KernelSpec> {
        let eta = 1e-6f64..1.0;
        prop_oneof![
            (proptest::collection::vec(-4.0f64..4.0, p), eta.clone())
                .prop_map(|(b, e)| KernelSpec::sim(b, e).unwrap()),
            (proptest::collection::vec(0.05f64..5.0, p), eta.clone())
                .prop_map(|(t, e)| KernelSpec::separable(t, e).unwrap()),
            (0.05f64..5.0, eta).prop_map(|(t, e)| KernelSpec::isotropic(t, e).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn matrix_symmetric_and_factor_reconstructs(
            (x, spec) in (2usize..12).prop_flat_map(|n| (unit_rows(n, 3), any_spec(3)))
        ) {
            let k = build_corr_matrix(&x, &spec).unwrap();
            let e = k.entries();
            prop_assert!((e - e.transpose()).abs().max() == 0.0);
            for i in 0..e.nrows() {
                prop_assert_eq!(e[(i, i)], 1.0 + spec.eta);
            }
            let l = k.cholesky().l();
            let mut target = e.clone();
            for i in 0..e.nrows() { target[(i, i)] += k.jitter(); }
            let rel = (&l * l.transpose() - &target).norm() / target.norm();
            prop_assert!(rel < 1e-10);
        }

        #[test]
        fn sim_sign_symmetry(
            xi in proptest::collection::vec(0.0f64..1.0, 4),
            xj in proptest::collection::vec(0.0f64..1.0, 4),
            beta in proptest::collection::vec(-5.0f64..5.0, 4),
        ) {
            let neg: Vec<f64> = beta.iter().map(|b| -b).collect();
            prop_assert_eq!(sim_corr(&xi, &xj, &beta).unwrap(), sim_corr(&xi, &xj, &neg).unwrap());
        }

        #[test]
        fn sim_is_gaussian_on_projection(
            xi in proptest::collection::vec(0.0f64..1.0, 4),
            xj in proptest::collection::vec(0.0f64..1.0, 4),
            beta in proptest::collection::vec(-5.0f64..5.0, 4),
        ) {
            let zi: f64 = xi.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let zj: f64 = xj.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let direct = anisotropic_corr(&[zi], &[zj], &[1.0]).unwrap();
            let sim = sim_corr(&xi, &xj, &beta).unwrap();
            prop_assert!((direct - sim).abs() < 1e-12);
        }

        #[test]
        fn collinear_points_factor(
            base in proptest::collection::vec(0.0f64..1.0, 3),
            beta in proptest::collection::vec(-3.0f64..3.0, 3),
            s in 0.0f64..0.5, t in 0.0f64..0.5,
        ) {
            // Points a, b, c whose indices differ by s and t: the 1-D Gaussian
            // kernel gives K(a,c) = K(a,b) K(b,c) exp(-2 Δab Δbc).
            let dir: Vec<f64> = beta.clone();
            let nb: f64 = dir.iter().map(|v| v * v).sum();
            prop_assume!(nb > 1e-3);
            let step = |x: &[f64], h: f64| -> Vec<f64> {
                x.iter().zip(&dir).map(|(a, d)| a + h * d / nb).collect()
            };
            let a = base.clone();
            let b = step(&a, s);
            let c = step(&b, t);
            let kab = sim_corr(&a, &b, &beta).unwrap();
            let kbc = sim_corr(&b, &c, &beta).unwrap();
            let kac = sim_corr(&a, &c, &beta).unwrap();
            prop_assert!((kac - kab * kbc * (-2.0 * s * t).exp()).abs() < 1e-12);
        }
    }
}
