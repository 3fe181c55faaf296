use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Relative slack when comparing pmf values, so mirror-image terms of a
/// symmetric distribution count as equal despite rounding.
const PMF_REL_TOL: f64 = 1e-7;

/// Two-sided exact binomial test of `wins_a` successes in
/// `wins_a + wins_b` trials against p = 0.5.
///
/// Sums the probability of every outcome no more likely than the observed
/// one; clipped to 1.
pub fn binomial_exact_test(wins_a: u64, wins_b: u64) -> Result<f64> {
    let n = wins_a + wins_b;
    if n == 0 {
        return Err(Error::NoDisagreements);
    }
    let ln_half_n = n as f64 * 0.5f64.ln();
    let ln_pmf = |k: u64| ln_binomial(n, k) + ln_half_n;
    let observed = ln_pmf(wins_a);
    let cutoff = observed + PMF_REL_TOL.ln_1p();
    let p: f64 = (0..=n)
        .map(ln_pmf)
        .filter(|&l| l <= cutoff)
        .map(f64::exp)
        .sum();
    Ok(p.min(1.0))
}
