//! Chen-Stein Poisson-approximation bounds for pair-indexed fields, where the
//! neighbourhood of a pair is every pair sharing at least one index with it.

use serde::Serialize;

use crate::error::{domain, size, Error, Result};
use crate::pair_count;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChenSteinBound {
    pub lambda: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    /// `(1 + 1/lambda)(b1 + b2 + b3)`, bounding `|P(max <= u) - e^{-lambda}|`.
    pub total_max_version: f64,
    /// `min(1, 1/lambda)(b1 + b2 + b3)`, bounding the total variation
    /// distance between the exceedance count and Poisson(lambda).
    pub total_count_version: f64,
}

/// `|B_alpha| = 2p - 3`, the pairs sharing an index with a given pair
/// (the pair itself included).
pub fn neighborhood_size(p: usize) -> Result<u64> {
    if p < 3 {
        return Err(size(format!("p = {p} < 3")));
    }
    Ok(2 * p as u64 - 3)
}

/// Stein terms for exchangeable exceedance events with common `marginal`
/// probability and common `joint` probability for pairs sharing one index.
/// `b3` is zero when events outside a neighbourhood are independent.
pub fn stein_bounds(p: usize, marginal: f64, joint: f64, b3: f64) -> Result<ChenSteinBound> {
    let nb = neighborhood_size(p)? as f64;
    for (name, v) in [("marginal", marginal), ("joint", joint)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(domain(format!("{name} probability {v} outside [0, 1]")));
        }
    }
    if joint > marginal {
        return Err(domain(format!("joint {joint} exceeds marginal {marginal}")));
    }
    if !(b3 >= 0.0) {
        return Err(domain(format!("b3 = {b3} must be nonnegative")));
    }
    let m = pair_count(p) as f64;
    let lambda = m * marginal;
    if lambda == 0.0 {
        return Err(Error::Degenerate("lambda = 0".into()));
    }
    let b1 = m * nb * marginal * marginal;
    let b2 = m * (nb - 1.0) * joint;
    let sum = b1 + b2 + b3;
    Ok(ChenSteinBound {
        lambda,
        b1,
        b2,
        b3,
        total_max_version: (1.0 + 1.0 / lambda) * sum,
        total_count_version: (1.0f64).min(1.0 / lambda) * sum,
    })
}

/// Poisson(lambda) probabilities for `k = 0..len`.
pub fn poisson_pmf(lambda: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut log_p = -lambda;
    for k in 0..len {
        if k > 0 {
            log_p += lambda.ln() - (k as f64).ln();
        }
        out.push(log_p.exp());
    }
    out
}

/// Total variation distance between the empirical law given by `hist`
/// (`hist[k]` = number of replications with count `k`) and Poisson(lambda).
pub fn empirical_tv_distance(hist: &[u64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(format!("lambda = {lambda} must be positive")));
    }
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return Err(size("empty histogram"));
    }
    let pmf = poisson_pmf(lambda, hist.len());
    let mut acc = 0.0;
    for (h, q) in hist.iter().zip(&pmf) {
        acc += (*h as f64 / total as f64 - q).abs();
    }
    let covered: f64 = pmf.iter().sum();
    Ok(0.5 * (acc + (1.0 - covered).max(0.0)))
}

/// Rough Monte Carlo standard error of [`empirical_tv_distance`]:
/// half the sum of the per-cell binomial standard errors.
pub fn tv_standard_error(hist: &[u64]) -> f64 {
    let total: u64 = hist.iter().sum();
    let r = total as f64;
    0.5 * hist
        .iter()
        .map(|&h| {
            let q = h as f64 / r;
            (q * (1.0 - q) / r).sqrt()
        })
        .sum::<f64>()
}

/// Histogram of nonnegative counts.
pub fn histogram(counts: &[u64]) -> Vec<u64> {
    let len = counts.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut h = vec![0u64; len];
    for &c in counts {
        h[c as usize] += 1;
    }
    h
}
