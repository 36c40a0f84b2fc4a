/// `ln(Σ exp(x_i))` with a max shift. Empty or all `-inf` input yields `-inf`.
pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// `k * ln(x)` with the convention `0 * ln(0) = 0`.
pub(crate) fn log_pow(ln_x: f64, k: u32) -> f64 {
    if k == 0 {
        0.0
    } else {
        f64::from(k) * ln_x
    }
}
