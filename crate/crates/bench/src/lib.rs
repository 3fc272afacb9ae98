//! Shared fixtures for the benchmarks.

use extint_core::simulate::{sample_matrix, EntryDistribution};
use extint_core::SampleMatrix;

/// Gaussian `p x n` matrix with a fixed seed.
pub fn gaussian_matrix(p: usize, n: usize) -> SampleMatrix {
    sample_matrix(&EntryDistribution::Gaussian, p, n, 42).expect("valid dimensions")
}

/// `(p, n)` grid used by the kernel benchmarks.
pub const SHAPES: [(usize, usize); 3] = [(60, 1000), (200, 1000), (500, 200)];
