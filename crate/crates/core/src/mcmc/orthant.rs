//! Orthant probabilities `P(sign(Z) = s)` for `Z ~ N_p(0, Σ)`.
//!
//! Closed forms cover `p ≤ 2`. Higher dimensions use Monte Carlo on a fixed
//! random stream with antithetic pairs, which makes `P(s) = P(-s)` hold
//! exactly and keeps every estimate reproducible.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;

/// Draws used by the Monte Carlo path (counted including antithetic partners).
pub const ORTHANT_MC_DRAWS: usize = 100_000;

const ORTHANT_SEED: u64 = 0x6f72_7468_616e_7421;

/// Largest dimension for which a full table of `2^p` patterns is built.
pub const MAX_TABLE_DIM: usize = 16;

/// Bitmask of a sign pattern: bit `j` set means component `j` is negative.
pub fn pattern_mask(signs: &[i8]) -> usize {
    signs
        .iter()
        .enumerate()
        .fold(0, |m, (j, s)| if *s < 0 { m | (1 << j) } else { m })
}

pub fn mask_signs(mask: usize, p: usize) -> Vec<i8> {
    (0..p)
        .map(|j| if mask & (1 << j) != 0 { -1 } else { 1 })
        .collect()
}

fn check_signs(signs: &[i8], p: usize) -> Result<()> {
    if signs.len() != p {
        return Err(Error::dim("orthant sign pattern", p, signs.len()));
    }
    if signs.iter().any(|s| *s != 1 && *s != -1) {
        return Err(Error::Orthant {
            signs: signs.to_vec(),
            reason: "signs must be +1 or -1".into(),
        });
    }
    Ok(())
}

/// `P(Z₁ > 0, Z₂ > 0)` for a standard bivariate normal with correlation `rho`.
pub fn bivariate_positive_orthant(rho: f64) -> f64 {
    0.25 + rho.clamp(-1.0, 1.0).asin() / (2.0 * PI)
}

/// Probability that a draw from `N_p(0, sigma)` has the given sign pattern.
///
/// Exact for `p ≤ 2`; Monte Carlo with [`ORTHANT_MC_DRAWS`] draws otherwise.
pub fn orthant_probability(sigma: &DMatrix<f64>, signs: &[i8]) -> Result<f64> {
    let p = sigma.nrows();
    check_signs(signs, p)?;
    if p == 0 {
        return Err(Error::InvalidParameter("empty covariance".into()));
    }
    let chol = linalg::spd_cholesky(sigma, "orthant covariance")?;
    if p <= 2 {
        return Ok(exact_low_dim(sigma, signs));
    }
    let l = chol.l();
    let counts = mc_counts(&l, ORTHANT_MC_DRAWS / 2, &mut rng::seeded(ORTHANT_SEED));
    let prob = counts[pattern_mask(signs)] as f64 / (2 * (ORTHANT_MC_DRAWS / 2)) as f64;
    if prob <= 0.0 {
        return Err(Error::Orthant {
            signs: signs.to_vec(),
            reason: format!("no hits in {ORTHANT_MC_DRAWS} draws"),
        });
    }
    Ok(prob)
}

/// Plain Monte Carlo estimate and its standard error, from `draws` i.i.d.
/// draws on stream `seed`. Used to cross-check the closed forms.
pub fn orthant_probability_mc(
    sigma: &DMatrix<f64>,
    signs: &[i8],
    draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let p = sigma.nrows();
    check_signs(signs, p)?;
    let l = linalg::spd_cholesky(sigma, "orthant covariance")?.l();
    let target = pattern_mask(signs);
    let mut r = rng::seeded(seed);
    let mut hits = 0usize;
    for _ in 0..draws {
        let z = DVector::from_fn(p, |_, _| r.sample::<f64, _>(StandardNormal));
        let x = &l * z;
        if mask_of(&x) == target {
            hits += 1;
        }
    }
    let est = hits as f64 / draws as f64;
    let se = (est * (1.0 - est) / draws as f64).sqrt();
    Ok((est, se))
}

fn exact_low_dim(sigma: &DMatrix<f64>, signs: &[i8]) -> f64 {
    if sigma.nrows() == 1 {
        return 0.5;
    }
    let rho = sigma[(0, 1)] / (sigma[(0, 0)] * sigma[(1, 1)]).sqrt();
    let same = signs[0] == signs[1];
    bivariate_positive_orthant(if same { rho } else { -rho })
}

fn mask_of(x: &DVector<f64>) -> usize {
    x.iter()
        .enumerate()
        .fold(0, |m, (j, v)| if *v < 0.0 { m | (1 << j) } else { m })
}

/// Antithetic counts: every draw `z` also counts `-z`.
fn mc_counts<R: Rng>(l: &DMatrix<f64>, pairs: usize, r: &mut R) -> Vec<u64> {
    let p = l.nrows();
    let full = (1usize << p) - 1;
    let mut counts = vec![0u64; 1 << p];
    for _ in 0..pairs {
        let z = DVector::from_fn(p, |_, _| r.sample::<f64, _>(StandardNormal));
        let m = mask_of(&(l * z));
        counts[m] += 1;
        counts[full ^ m] += 1;
    }
    counts
}

/// Probabilities of all `2^p` sign patterns, indexed by [`pattern_mask`].
#[derive(Debug, Clone)]
pub struct OrthantTable {
    p: usize,
    probs: Vec<f64>,
}

impl OrthantTable {
    pub fn new(sigma: &DMatrix<f64>) -> Result<Self> {
        let p = sigma.nrows();
        if p == 0 || p > MAX_TABLE_DIM {
            return Err(Error::InvalidParameter(format!(
                "orthant tables support 1..={MAX_TABLE_DIM} dimensions, got {p}"
            )));
        }
        let chol = linalg::spd_cholesky(sigma, "orthant covariance")?;
        let probs = if p <= 2 {
            (0..1 << p)
                .map(|m| exact_low_dim(sigma, &mask_signs(m, p)))
                .collect()
        } else {
            let pairs = ORTHANT_MC_DRAWS / 2;
            let counts = mc_counts(&chol.l(), pairs, &mut rng::seeded(ORTHANT_SEED));
            counts
                .iter()
                .map(|c| *c as f64 / (2 * pairs) as f64)
                .collect()
        };
        Ok(OrthantTable { p, probs })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn prob(&self, signs: &[i8]) -> f64 {
        self.probs[pattern_mask(signs)]
    }

    pub fn prob_mask(&self, mask: usize) -> f64 {
        self.probs[mask]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr2(rho: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0])
    }

    #[test]
    fn one_dimension_is_half() {
        let s = DMatrix::from_element(1, 1, 3.0);
        assert_eq!(orthant_probability(&s, &[1]).unwrap(), 0.5);
        assert_eq!(orthant_probability(&s, &[-1]).unwrap(), 0.5);
    }

    #[test]
    fn independent_pair_is_quarter() {
        assert!((orthant_probability(&corr2(0.0), &[1, 1]).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn correlated_pair_is_third() {
        let p = orthant_probability(&corr2(0.5), &[1, 1]).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
        let q = orthant_probability(&corr2(0.5), &[1, -1]).unwrap();
        assert!((q - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_does_not_matter() {
        let s = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 1.0]);
        let p = orthant_probability(&s, &[-1, -1]).unwrap();
        assert!((p - bivariate_positive_orthant(0.5)).abs() < 1e-12);
    }

    #[test]
    fn three_dim_identity_is_eighth() {
        let s = DMatrix::identity(3, 3);
        for m in 0..8 {
            let p = orthant_probability(&s, &mask_signs(m, 3)).unwrap();
            assert!((p - 0.125).abs() < 3e-3, "pattern {m}: {p}");
        }
    }

    #[test]
    fn three_dim_equicorrelated_closed_form() {
        // For equicorrelation ρ the all-positive orthant is 1/8 + 3 asin(ρ)/(4π).
        let rho = 0.3;
        let s = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { rho });
        let p = orthant_probability(&s, &[1, 1, 1]).unwrap();
        let exact = 0.125 + 3.0 * rho.asin() / (4.0 * PI);
        assert!((p - exact).abs() < 3e-3);
    }

    #[test]
    fn table_sums_to_one_and_is_antipodal() {
        let s = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.4, -0.2, 0.4, 1.0, 0.1, -0.2, 0.1, 1.0],
        );
        let t = OrthantTable::new(&s).unwrap();
        let total: f64 = (0..8).map(|m| t.prob_mask(m)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for m in 0..8 {
            assert_eq!(t.prob_mask(m), t.prob_mask(7 ^ m));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(orthant_probability(&corr2(0.5), &[1]).is_err());
        assert!(orthant_probability(&corr2(0.5), &[1, 0]).is_err());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(orthant_probability(&bad, &[1, 1]).is_err());
    }
}
