//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// First jitter tried after a failed factorization.
pub const JITTER_START: f64 = 1e-10;
/// Largest jitter tried before giving up.
pub const JITTER_MAX: f64 = 1e-6;

/// Cholesky factorization with escalating diagonal jitter.
///
/// Tries the matrix as given, then adds `1e-10, 1e-9, ..., 1e-6` to the
/// diagonal. Returns the factor and the jitter that was needed (0 when none).
pub fn cholesky_with_jitter(m: &DMatrix<f64>) -> Option<(Cholesky<f64, Dyn>, f64)> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        if factor_is_finite(&ch) {
            return Some((ch, 0.0));
        }
    }
    let mut jitter = JITTER_START;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        let mut a = m.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(a) {
            if factor_is_finite(&ch) {
                return Some((ch, jitter));
            }
        }
        jitter *= 10.0;
    }
    None
}

fn factor_is_finite(ch: &Cholesky<f64, Dyn>) -> bool {
    ch.l_dirty().iter().all(|v| v.is_finite())
}

pub fn log_det(ch: &Cholesky<f64, Dyn>) -> f64 {
    let l = ch.l_dirty();
    2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
}

/// Solves `L v = b` for the lower Cholesky factor `L`.
pub fn solve_lower(ch: &Cholesky<f64, Dyn>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let l = ch.l();
    l.solve_lower_triangular(b)
        .expect("Cholesky factor has a nonzero diagonal")
}

pub fn solve_lower_vec(ch: &Cholesky<f64, Dyn>, b: &DVector<f64>) -> DVector<f64> {
    let l = ch.l();
    l.solve_lower_triangular(b)
        .expect("Cholesky factor has a nonzero diagonal")
}

/// A matrix `A` with `A Aᵀ = m` for a symmetric positive semi-definite `m`.
///
/// Uses Cholesky when it succeeds outright and otherwise falls back to a
/// clipped eigendecomposition, so rank-deficient (or all-zero) matrices still
/// yield a valid factor without jitter.
pub fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        if factor_is_finite(&ch) {
            return ch.l();
        }
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut v = eig.eigenvectors;
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        v.column_mut(j).scale_mut(s);
    }
    v
}

/// Checks that `m` is square with side `n` and returns its Cholesky factor.
pub fn spd_cholesky(m: &DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim(what, m.nrows(), m.ncols()));
    }
    match Cholesky::new(m.clone()) {
        Some(ch) if factor_is_finite(&ch) => Ok(ch),
        _ => Err(Error::NotPositiveDefinite(what)),
    }
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
