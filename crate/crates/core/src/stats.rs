//! Exact binomial confidence bounds and normal quantiles.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

/// Inverse of `p ↦ I_p(a, b)` by bisection; `I_p` is increasing in `p`.
fn beta_quantile(a: f64, b: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-sided Clopper–Pearson lower bound for a success probability with
/// `successes` out of `trials`, holding with probability `1 - alpha`.
pub fn clopper_pearson_lower(successes: u64, trials: u64, alpha: f64) -> f64 {
    assert!(successes <= trials && trials > 0);
    if successes == 0 {
        return 0.0;
    }
    beta_quantile(successes as f64, (trials - successes + 1) as f64, alpha)
}

/// One-sided Clopper–Pearson upper bound, holding with probability `1 - alpha`.
pub fn clopper_pearson_upper(successes: u64, trials: u64, alpha: f64) -> f64 {
    assert!(successes <= trials && trials > 0);
    if successes == trials {
        return 1.0;
    }
    beta_quantile((successes + 1) as f64, (trials - successes) as f64, 1.0 - alpha)
}

/// Two-sided exact interval at coverage `confidence`.
pub fn clopper_pearson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    let alpha = 0.5 * (1.0 - confidence);
    (
        clopper_pearson_lower(successes, trials, alpha),
        clopper_pearson_upper(successes, trials, alpha),
    )
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}
