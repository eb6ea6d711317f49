//! Posterior over a set of partition models.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::marginal::log_marginal;
use super::partition::PartitionModel;
use crate::blockstats::BlockCounts;
use crate::error::{Error, Result};

/// Prior over the supplied model list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelPrior {
    /// Flat over the models actually supplied.
    #[default]
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTable {
    pub level: u32,
    pub models: Vec<PartitionModel>,
    pub log_marginals: Vec<f64>,
    pub log_prior: Vec<f64>,
    pub posteriors: Vec<f64>,
    pub best_index: usize,
    /// Posterior of the one-block model, when it is among `models`.
    pub symmetric_posterior: Option<f64>,
}

impl PosteriorTable {
    pub fn best(&self) -> &PartitionModel {
        &self.models[self.best_index]
    }

    /// Model indices sorted by decreasing posterior (stable on ties).
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.models.len()).collect();
        idx.sort_by(|&a, &b| {
            self.posteriors[b]
                .partial_cmp(&self.posteriors[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        idx
    }
}

/// Compensated sum, independent of evaluation chunking.
fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// Index of the largest posterior, lowest index on ties.
pub fn best_model(table: &PosteriorTable) -> usize {
    argmax(&table.posteriors)
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Normalised posterior `P(M | data)` over `models`.
pub fn posterior(
    counts: &BlockCounts,
    models: Vec<PartitionModel>,
    prior: ModelPrior,
) -> Result<PosteriorTable> {
    if models.is_empty() {
        return Err(Error::Contract("posterior needs at least one model".into()));
    }
    let log_marginals = models
        .par_iter()
        .map(|m| log_marginal(counts, m))
        .collect::<Result<Vec<f64>>>()?;
    let log_prior = match prior {
        ModelPrior::Uniform => vec![-(models.len() as f64).ln(); models.len()],
    };
    let joint: Vec<f64> = log_marginals
        .iter()
        .zip(&log_prior)
        .map(|(l, p)| l + p)
        .collect();
    let shift = joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = joint.iter().map(|j| (j - shift).exp()).collect();
    let normaliser = neumaier(weights.iter().copied());
    let posteriors: Vec<f64> = weights.iter().map(|w| w / normaliser).collect();
    let best_index = argmax(&posteriors);
    let symmetric_posterior = models
        .iter()
        .position(PartitionModel::is_one_block)
        .map(|k| posteriors[k]);
    Ok(PosteriorTable {
        level: counts.level,
        models,
        log_marginals,
        log_prior,
        posteriors,
        best_index,
        symmetric_posterior,
    })
}
