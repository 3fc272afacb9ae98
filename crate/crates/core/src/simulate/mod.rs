//! Samplers, Gaussian pair fields and Monte Carlo experiments.
//!
//! Every replication draws from its own ChaCha8 stream keyed by the master
//! seed, and reports are assembled in replication order, so results do not
//! depend on scheduling or thread count.

pub mod experiment;
pub mod field;
pub mod ks;
pub mod rng;
pub mod sampler;

pub use experiment::*;
pub use field::{count_field_exceedances, equicorr_pair_field, field_max};
pub use ks::{ks_statistic, spearman, LimitLaw};
pub use rng::rep_rng;
pub use sampler::{equicorr_normal_sample, sample_matrix, EntryDistribution};
