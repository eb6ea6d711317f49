//! Borel-type Bayesian frequency bound.
//!
//! Comparing the evidence of the one-block (uniform) model with that of the
//! fully distinct model at perfectly symmetric counts `n / (i 2^i)` yields a
//! bound on the coupled deviations
//!
//! ```text
//! sqrt( sum_{1 <= j <= j' <= 2^i - 1} d_j d_j' )
//!     < sqrt( i^2 / (n^2 psi_1(1/2 + n/(i 2^i))) * ln R )
//! ln R = -n ln 2 + 2^i ln Gamma(1/2) + ln Gamma(2^(i-1) + n/i)
//!        - ln Gamma(2^(i-1)) - 2^i ln Gamma(1/2 + n/(i 2^i))
//! ```
//!
//! where `d_j = N_j / floor(n/i) - 2^-i`. Substring 0 is left out of the
//! left-hand sum.

use serde::{Deserialize, Serialize};

use super::special::{ln_gamma, trigamma, LN_GAMMA_HALF};
use crate::bitstream::BitSequence;
use crate::blockstats::{count_blocks_par, BlockCounts};
use crate::borel::{borel_deviations, resolve_levels};
use crate::error::{Error, Result};

/// Largest level accepted by [`bayes_bound_rhs`].
pub const MAX_BOUND_LEVEL: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesBoundReport {
    #[serde(rename = "i")]
    pub level: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub passes: bool,
}

/// `ln R`: one-block minus fully-distinct log-evidence at symmetric counts.
///
/// `n` is real so that the expression can be evaluated off the integers.
pub fn bayes_bound_log_ratio(n: f64, level: u32) -> f64 {
    let i = f64::from(level);
    let k = (1u64 << level) as f64;
    let per_block = n / i;
    let per_substring = per_block / k;
    -n * std::f64::consts::LN_2 + k * LN_GAMMA_HALF + ln_gamma(0.5 * k + per_block)
        - ln_gamma(0.5 * k)
        - k * ln_gamma(0.5 + per_substring)
}

/// Right-hand side of the bound for a sequence of `n` bits at `level`.
pub fn bayes_bound_rhs(n: u64, level: u32) -> Result<f64> {
    if level == 0 || level > MAX_BOUND_LEVEL {
        return Err(Error::Domain(format!(
            "Bayesian bound defined for levels 1..={MAX_BOUND_LEVEL}, got {level}"
        )));
    }
    let min_n = u64::from(level) << level;
    if n < min_n {
        return Err(Error::Domain(format!(
            "Bayesian bound at level {level} needs n >= i 2^i = {min_n}, got {n}"
        )));
    }
    let nf = n as f64;
    let i = f64::from(level);
    let per_substring = nf / (i * (1u64 << level) as f64);
    let log_ratio = bayes_bound_log_ratio(nf, level);
    let psi1 = trigamma(0.5 + per_substring);
    let radicand = i * i / (nf * nf * psi1) * log_ratio;
    if !radicand.is_finite() || radicand < 0.0 {
        return Err(Error::Numeric(format!(
            "Bayesian bound radicand {radicand} invalid at n = {n}, level {level} (ln R = {log_ratio})"
        )));
    }
    Ok(radicand.sqrt())
}

/// Left-hand side `sqrt(sum_{j <= j'} d_j d_j')` over `j, j' >= 1`.
pub fn bayes_bound_lhs(counts: &BlockCounts) -> Result<f64> {
    let deviations = borel_deviations(counts)?;
    let tail = &deviations[1..];
    let s: f64 = tail.iter().sum();
    let q: f64 = tail.iter().map(|d| d * d).sum();
    let radicand = 0.5 * (s * s + q);
    if radicand < -1e-15 || !radicand.is_finite() {
        return Err(Error::Numeric(format!(
            "negative coupled-deviation radicand {radicand}"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

pub fn bayes_bound_level(counts: &BlockCounts, n: u64) -> Result<BayesBoundReport> {
    let lhs = bayes_bound_lhs(counts)?;
    let rhs = bayes_bound_rhs(n, counts.level)?;
    Ok(BayesBoundReport {
        level: counts.level,
        lhs,
        rhs,
        passes: lhs < rhs,
    })
}

/// Evaluates the bound at levels `1..=levels` (default: all admissible).
pub fn bayes_bound_test(seq: &BitSequence, levels: Option<u32>) -> Result<Vec<BayesBoundReport>> {
    let n = seq.len();
    let max = resolve_levels(n, levels)?;
    (1..=max)
        .map(|i| bayes_bound_level(&count_blocks_par(seq, i)?, n))
        .collect()
}
