//! Limit theory for maxima of interpoint distances and pair-indexed random
//! walks in high dimension.
//!
//! The crate is organised bottom-up:
//!
//! - [`moments`]: moment profiles of the entry law, the pair correlation
//!   `rho` and regime classification;
//! - [`normseq`]: the `d`-sequences and centering/scaling constants;
//! - [`pairstats`]: blocked O(p^2 n) kernels for pair fields and their extremes;
//! - [`gauss`]: normal/Gumbel functions, Gaussian tail oracles and asymptotes;
//! - [`chenstein`]: Poisson-approximation bounds for the pair dependency graph;
//! - [`hypothesis`]: the mean-equality test and covariance max-entry regimes;
//! - [`simulate`]: samplers, Gaussian pair fields and Monte Carlo experiments.

// Guards are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chenstein;
pub mod error;
pub mod gauss;
pub mod hypothesis;
pub mod moments;
pub mod normseq;
pub mod pairstats;
pub mod quad;
pub mod simulate;

pub use error::{Error, Result};
pub use moments::{MomentProfile, RegimeReport, TailClass};
pub use normseq::{DKind, Normalizers};
pub use pairstats::{Pair, PairExtremes, PairField, PairKind, SampleMatrix};

/// Library version, embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Number of unordered pairs `p(p-1)/2`, computed exactly.
pub fn pair_count(p: usize) -> u64 {
    let p = p as u64;
    p * p.saturating_sub(1) / 2
}
