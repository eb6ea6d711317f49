//! Bayesian model selection over partition models.

mod bound;
mod marginal;
mod partition;
mod posterior;
mod special;

pub use bound::{
    bayes_bound_level, bayes_bound_lhs, bayes_bound_log_ratio, bayes_bound_rhs, bayes_bound_test,
    BayesBoundReport, MAX_BOUND_LEVEL,
};
pub use marginal::{block_masses, log_marginal, log_marginal_from_masses, BlockMass};
pub use partition::{
    bell_number, enumerate_partitions, partition_count, PartitionModel, Partitions, MAX_BELL_INDEX,
    MAX_ENUMERATION_SIZE,
};
pub use posterior::{best_model, posterior, ModelPrior, PosteriorTable};
pub use special::{log_gamma, polygamma1, LN_GAMMA_HALF, TRIGAMMA_HALF};
