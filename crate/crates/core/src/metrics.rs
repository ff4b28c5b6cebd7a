//! Predictive-accuracy metrics and comparison summaries.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// `(y − μ)ᵀ Σ⁻¹ (y − μ)`, via a Cholesky solve.
pub fn mahalanobis(y: &DVector<f64>, mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<f64> {
    if y.len() != mu.len() {
        return Err(Error::dim("mahalanobis mean", y.len(), mu.len()));
    }
    if sigma.nrows() != y.len() {
        return Err(Error::dim("mahalanobis covariance", y.len(), sigma.nrows()));
    }
    let ch = linalg::spd_cholesky(sigma, "mahalanobis covariance")?;
    let z = linalg::solve_lower_vec(&ch, &(y - mu));
    Ok(z.norm_squared())
}

/// Square root of [`mahalanobis`]; the quantity reported in comparisons.
pub fn sqrt_mahalanobis(y: &DVector<f64>, mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<f64> {
    mahalanobis(y, mu, sigma).map(f64::sqrt)
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::dim("rmse", y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(Error::InsufficientData("rmse of empty vectors".into()));
    }
    let ss: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / y.len() as f64).sqrt())
}

/// Quantile of sorted data with linear interpolation between order
/// statistics (R's default, type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Min, quartiles, mean and max, in the order of R's `summary()`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SixNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl SixNumber {
    pub const ROW_LABELS: [&'static str; 6] = ["Min.", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max."];

    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(SixNumber {
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }

    pub fn rows(&self) -> [f64; 6] {
        [self.min, self.q1, self.median, self.mean, self.q3, self.max]
    }
}

/// Per-method sequences of √Mahalanobis distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub methods: Vec<String>,
    /// `distances[m][r]`: method `m`, replicate (or fold) `r`.
    pub distances: Vec<Vec<f64>>,
    /// Replicate indices that failed and were excluded, per method.
    pub failures: Vec<Vec<usize>>,
}

impl ComparisonSummary {
    pub fn method_index(&self, method: &str) -> Option<usize> {
        self.methods.iter().position(|m| m == method)
    }

    pub fn distances_of(&self, method: &str) -> Option<&[f64]> {
        self.method_index(method).map(|i| self.distances[i].as_slice())
    }

    pub fn summary(&self) -> Vec<Option<SixNumber>> {
        self.distances.iter().map(|d| SixNumber::of(d)).collect()
    }

    pub fn median_of(&self, method: &str) -> Option<f64> {
        self.distances_of(method)
            .and_then(SixNumber::of)
            .map(|s| s.median)
    }

    /// Fraction of paired replicates where method `a` has the smaller
    /// distance than method `b`. Only meaningful when neither has failures.
    pub fn win_rate(&self, a: &str, b: &str) -> Option<f64> {
        let da = self.distances_of(a)?;
        let db = self.distances_of(b)?;
        let n = da.len().min(db.len());
        if n == 0 {
            return None;
        }
        let wins = da.iter().zip(db).filter(|(x, y)| x < y).count();
        Some(wins as f64 / n as f64)
    }

    /// Sample variance of one method's distances.
    pub fn variance_of(&self, method: &str) -> Option<f64> {
        let d = self.distances_of(method)?;
        if d.len() < 2 {
            return None;
        }
        let m = d.iter().sum::<f64>() / d.len() as f64;
        Some(d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (d.len() - 1) as f64)
    }

    /// The six-row table as text, one column per method.
    pub fn table(&self) -> String {
        let sums = self.summary();
        let mut out = format!("{:<8}", "");
        for m in &self.methods {
            out.push_str(&format!("{m:>10}"));
        }
        out.push('\n');
        for (r, label) in SixNumber::ROW_LABELS.iter().enumerate() {
            out.push_str(&format!("{label:<8}"));
            for s in &sums {
                match s {
                    Some(s) => out.push_str(&format!("{:>10.3}", s.rows()[r])),
                    None => out.push_str(&format!("{:>10}", "NA")),
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mahalanobis_examples() {
        let y = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(mahalanobis(&y, &y, &DMatrix::identity(2, 2)).unwrap(), 0.0);
        let z = DVector::zeros(2);
        assert!((mahalanobis(&y, &z, &DMatrix::identity(2, 2)).unwrap() - 5.0).abs() < 1e-14);
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let d = DVector::from_vec(vec![1.0, 1.0]);
        assert!((mahalanobis(&d, &z, &s).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn mahalanobis_rejects_indefinite() {
        let y = DVector::from_vec(vec![1.0, 2.0]);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(mahalanobis(&y, &y, &bad).is_err());
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 3.5355).abs() < 1e-4);
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn six_number_matches_r() {
        // summary(c(1, 2, 3, 4, 10)) in R.
        let s = SixNumber::of(&[4.0, 1.0, 10.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.rows(), [1.0, 2.0, 3.0, 4.0, 4.0, 10.0]);
        let one = SixNumber::of(&[2.5]).unwrap();
        assert!(one.rows().iter().all(|v| *v == 2.5));
    }

    proptest! {
        #[test]
        fn scale_and_rotation(
            d in proptest::collection::vec(-3.0f64..3.0, 3),
            diag in proptest::collection::vec(0.2f64..3.0, 3),
            angle in 0.0f64..6.3,
            c in 0.1f64..10.0,
        ) {
            let sigma = DMatrix::from_diagonal(&DVector::from_vec(diag));
            let y = DVector::from_vec(d);
            let mu = DVector::zeros(3);
            let base = mahalanobis(&y, &mu, &sigma).unwrap();
            let scaled = mahalanobis(&y, &mu, &(&sigma * c)).unwrap();
            prop_assert!((scaled - base / c).abs() < 1e-9 * base.max(1.0));
            let (s, co) = angle.sin_cos();
            let q = DMatrix::from_row_slice(3, 3, &[co, -s, 0.0, s, co, 0.0, 0.0, 0.0, 1.0]);
            let rotated = mahalanobis(&(&q * &y), &mu, &(&q * &sigma * q.transpose())).unwrap();
            prop_assert!((rotated - base).abs() < 1e-9 * base.max(1.0));
        }
    }
}
