//! Chain diagnostics.

/// Autocorrelation at `lag` of a centered series with variance `var`.
fn autocorr(centered: &[f64], var: f64, lag: usize) -> f64 {
    let t = centered.len();
    let s: f64 = centered[..t - lag]
        .iter()
        .zip(&centered[lag..])
        .map(|(a, b)| a * b)
        .sum();
    s / (t as f64 * var)
}

/// Effective sample size `T / (1 + 2 Σₖ ρₖ)`.
///
/// Autocorrelations are summed in adjacent pairs until a pair sum turns
/// nonpositive (Geyer's initial positive sequence). The result is clamped to
/// `[1, T]`; a constant series returns 1.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let t = series.len();
    if t < 2 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / t as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let var = centered.iter().map(|v| v * v).sum::<f64>() / t as f64;
    if !(var > 0.0) || !var.is_finite() {
        return 1.0;
    }
    // Σ over pairs Γₘ = ρ₂ₘ + ρ₂ₘ₊₁, starting from ρ₀ = 1.
    let mut pair_sum = 0.0;
    let mut lag = 0;
    while lag + 1 < t {
        let gamma = autocorr(&centered, var, lag) + autocorr(&centered, var, lag + 1);
        if gamma <= 0.0 {
            break;
        }
        pair_sum += gamma;
        lag += 2;
    }
    let tau = 2.0 * pair_sum - 1.0;
    let ess = t as f64 / tau.max(f64::MIN_POSITIVE);
    ess.clamp(1.0, t as f64)
}
