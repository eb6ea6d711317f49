//! Exact evidence of a partition model under the Jeffreys prior.
//!
//! In a model with blocks `B_1..B_K` of sizes `s_k`, every substring in
//! block `k` has probability `theta_k / s_k`, and `(theta_1..theta_K)` is
//! Dirichlet(1/2, .., 1/2) distributed. Integrating the likelihood against
//! that prior gives
//!
//! ```text
//! ln P(data | M) = -sum_k m_k ln s_k + ln Gamma(K/2) - K ln Gamma(1/2)
//!                  + sum_k ln Gamma(m_k + 1/2) - ln Gamma(T + K/2)
//! ```
//!
//! with `m_k` the number of observed blocks falling in `B_k` and `T` the
//! total. For `K = 1` this is `-T i ln 2`, the probability of the data under
//! the uniform model.

use super::partition::PartitionModel;
use super::special::{ln_gamma, LN_GAMMA_HALF};
use crate::blockstats::BlockCounts;
use crate::error::{Error, Result};

/// Per-block observed mass and size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMass {
    /// Total count `m_k` over the block (may be fractional).
    pub mass: f64,
    /// Number of substrings `s_k` in the block.
    pub size: f64,
}

/// Sums `counts` over the blocks of `model`.
pub fn block_masses(counts: &BlockCounts, model: &PartitionModel) -> Result<Vec<BlockMass>> {
    if model.size() != counts.counts.len() {
        return Err(Error::Contract(format!(
            "model over {} substrings does not match counts at level {} ({} substrings)",
            model.size(),
            counts.level,
            counts.counts.len()
        )));
    }
    let mut masses: Vec<BlockMass> = model
        .block_sizes()
        .iter()
        .map(|&s| BlockMass {
            mass: 0.0,
            size: s as f64,
        })
        .collect();
    let mut integer = vec![0u64; masses.len()];
    for (&b, &c) in model.rgs().iter().zip(&counts.counts) {
        integer[b as usize] += c;
    }
    for (m, c) in masses.iter_mut().zip(integer) {
        m.mass = c as f64;
    }
    Ok(masses)
}

/// Log-evidence in nats from block masses; see the module docs.
///
/// Accepts real-valued masses so that idealised symmetric counts such as
/// `n / (i 2^i)` can be evaluated directly.
pub fn log_marginal_from_masses(blocks: &[BlockMass]) -> Result<f64> {
    if blocks.is_empty() {
        return Err(Error::Contract("a model needs at least one block".into()));
    }
    if let Some(bad) = blocks
        .iter()
        .find(|b| !(b.mass >= 0.0 && b.mass.is_finite() && b.size >= 1.0 && b.size.is_finite()))
    {
        return Err(Error::Domain(format!("invalid block mass/size {bad:?}")));
    }
    let k = blocks.len() as f64;
    let total: f64 = blocks.iter().map(|b| b.mass).sum();
    let size_term: f64 = blocks
        .iter()
        .filter(|b| b.mass > 0.0 && b.size > 1.0)
        .map(|b| b.mass * b.size.ln())
        .sum();
    if blocks.len() == 1 {
        return Ok(-size_term);
    }
    let gamma_terms: f64 = blocks.iter().map(|b| ln_gamma(b.mass + 0.5)).sum();
    let value = -size_term + ln_gamma(0.5 * k) - k * LN_GAMMA_HALF + gamma_terms
        - ln_gamma(total + 0.5 * k);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numeric(format!(
            "log-evidence not finite for {} blocks",
            blocks.len()
        )))
    }
}

/// `ln P(data | model)` in nats for the observed block counts.
pub fn log_marginal(counts: &BlockCounts, model: &PartitionModel) -> Result<f64> {
    log_marginal_from_masses(&block_masses(counts, model)?)
}
