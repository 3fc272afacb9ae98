//! Limit laws and goodness-of-fit diagnostics.

use serde::Serialize;

use crate::error::{size, Result};
use crate::gauss::{gumbel_cdf, std_normal_cdf, std_normal_pdf};
use crate::quad::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law")]
pub enum LimitLaw {
    Gumbel,
    /// Law of `-G` for standard Gumbel `G`.
    NegGumbel,
    Normal,
    Uniform01,
    /// `N(0,1) + G / (sqrt(8) lambda)`, independent summands.
    Convolution {
        lambda: f64,
    },
    /// Law of `-log(E_1 + ... + E_k)` for iid unit exponentials.
    NegLogGamma {
        k: u32,
    },
}

impl LimitLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LimitLaw::Gumbel => gumbel_cdf(x),
            LimitLaw::NegGumbel => 1.0 - gumbel_cdf(-x),
            LimitLaw::Normal => std_normal_cdf(x),
            LimitLaw::Uniform01 => x.clamp(0.0, 1.0),
            LimitLaw::Convolution { lambda } => convolution_cdf(x, lambda),
            LimitLaw::NegLogGamma { k } => neg_log_gamma_cdf(x, k),
        }
    }
}

/// `P(N + G/(sqrt(8) lambda) <= x) = int phi(z) Lambda(sqrt(8) lambda (x - z)) dz`.
fn convolution_cdf(x: f64, lambda: f64) -> f64 {
    let a = 8f64.sqrt() * lambda;
    let f = |z: f64| std_normal_pdf(z) * gumbel_cdf(a * (x - z));
    // Lambda is ~1 for z well below x and ~0 once a(x - z) < -4, so split there.
    let knots = [-10.0, (x - 4.0 / a).clamp(-10.0, 10.0), x.clamp(-10.0, 10.0), (x + 4.0 / a).clamp(-10.0, 10.0), 10.0];
    let mut total = 0.0;
    for w in knots.windows(2) {
        if w[1] > w[0] {
            total += integrate(&f, w[0], w[1], 1e-12).0;
        }
    }
    total.clamp(0.0, 1.0)
}

/// `P(-log Gamma_k <= x) = P(Gamma_k >= e^{-x}) = sum_{i<k} e^{-u} u^i / i!`, `u = e^{-x}`.
fn neg_log_gamma_cdf(x: f64, k: u32) -> f64 {
    let u = (-x).exp();
    if !u.is_finite() {
        return 0.0;
    }
    let mut term = (-u).exp();
    let mut acc = term;
    for i in 1..k {
        term *= u / i as f64;
        acc += term;
    }
    acc.min(1.0)
}

/// Two-sided Kolmogorov-Smirnov distance `sup |F_n - F|`.
pub fn ks_statistic(samples: &[f64], law: &LimitLaw) -> Result<f64> {
    if samples.is_empty() {
        return Err(size("KS statistic of an empty sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = law.cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && xs[idx[e + 1]] == xs[idx[k]] {
            e += 1;
        }
        let avg = (k + e) as f64 / 2.0 + 1.0;
        for &t in &idx[k..=e] {
            r[t] = avg;
        }
        k = e + 1;
    }
    r
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(size("rank correlation needs two samples of equal length >= 2"));
    }
    Ok(pearson(&ranks(a), &ranks(b)))
}
