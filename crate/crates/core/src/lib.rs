//! Randomness certification for binary sequences.
//!
//! The crate bundles two families of tests and the tooling around them:
//!
//! - the Borel-normality criterion ([`borel`]), which bounds the frequency of
//!   every `i`-bit substring by `sqrt(log2(n)/n)` for all admissible levels
//!   `i <= log2(log2(n))`;
//! - Bayesian model selection over partition models of the substring
//!   alphabet ([`bayes`]), including the exact Jeffreys-prior evidence, the
//!   posterior over a model set, and the closed-form frequency bound that
//!   couples all substring deviations at a level.
//!
//! Sequences come from ASCII or packed files ([`bitstream`]), from photon
//! time tags via interarrival parity ([`extract`]), or from the seeded
//! generators in [`simgen`] that model detector after-pulsing and dead time.

pub mod bayes;
pub mod bitstream;
pub mod blockstats;
pub mod borel;
mod error;
pub mod extract;
pub mod quadrature;
pub mod report;
pub mod simgen;

pub use bayes::{
    bayes_bound_lhs, bayes_bound_rhs, bayes_bound_test, bell_number, best_model,
    enumerate_partitions, log_gamma, log_marginal, polygamma1, posterior, BayesBoundReport,
    ModelPrior, PartitionModel, PosteriorTable,
};
pub use bitstream::{load_ascii, load_packed, BitFormat, BitSequence};
pub use blockstats::{count_blocks, max_borel_level, merge_counts, BlockCounts};
pub use borel::{borel_bound, borel_deviations, borel_test, BorelLevelReport, BorelReport};
pub use error::{Error, Result};
pub use extract::{
    interarrivals, parity_bias_estimate, timetags_to_bits, DensitySpec, TimeTagSeries,
};
pub use simgen::{gen_bernoulli, gen_detector, gen_markov, GeneratorConfig, GeneratorKind};
