//! Per-pair statistics over `p` vectors in dimension `n`, and their extremes.
//!
//! Pairs are 0-based `(i, j)` with `i < j`, stored in lexicographic order.
//! Every kernel computes each pair value with a fixed summation order, so
//! results do not depend on the rayon thread count.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{size, Error, Result};
use crate::normseq::Normalizers;

/// Rows per block in the pairwise kernels.
pub const BLOCK: usize = 64;
/// Above this dimension inner products use compensated summation.
pub const COMPENSATED_ABOVE: usize = 10_000;

/// `p` observation vectors of dimension `n`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    p: usize,
    n: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(p: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if p < 2 || n < 1 {
            return Err(size(format!("need p >= 2 and n >= 1, got p = {p}, n = {n}")));
        }
        if data.len() != p * n {
            return Err(Error::Input(format!("expected {} values, got {}", p * n, data.len())));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite entry at row {}, column {}", k / n, k % n)));
        }
        Ok(SampleMatrix { p, n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("ragged rows".into()));
        }
        Self::new(rows.len(), n, rows.concat())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Swap the roles of rows and columns.
    pub fn transpose(&self) -> Result<Self> {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.p {
            for l in 0..self.n {
                out[l * self.p + i] = self.data[i * self.n + l];
            }
        }
        Self::new(self.n, self.p, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
}

impl fmt::Display for Pair {
    /// 1-based, as shown to users.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i + 1, self.j + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PairKind {
    SqDist,
    QDist(f64),
    Walk,
    CovEntry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairField {
    pub p: usize,
    pub values: Vec<f64>,
    pub kind: PairKind,
}

/// Offset of the first pair `(i, i+1)` in lexicographic order.
pub fn row_offset(p: usize, i: usize) -> usize {
    i * (2 * p - i - 1) / 2
}

pub fn pair_index(p: usize, pair: Pair) -> usize {
    debug_assert!(pair.i < pair.j && pair.j < p);
    row_offset(p, pair.i) + (pair.j - pair.i - 1)
}

/// Inverse of [`pair_index`].
pub fn pair_at(p: usize, k: usize) -> Pair {
    // Largest i with row_offset(p, i) <= k; solve the quadratic then fix up.
    let pf = p as f64;
    let disc = (2.0 * pf - 1.0).powi(2) - 8.0 * k as f64;
    let mut i = (((2.0 * pf - 1.0) - disc.max(0.0).sqrt()) / 2.0).floor().max(0.0) as usize;
    while i > 0 && row_offset(p, i) > k {
        i -= 1;
    }
    while i + 1 < p && row_offset(p, i + 1) <= k {
        i += 1;
    }
    Pair { i, j: k - row_offset(p, i) + i + 1 }
}

impl PairField {
    pub fn new(p: usize, values: Vec<f64>, kind: PairKind) -> Result<Self> {
        if values.len() != p * p.saturating_sub(1) / 2 || values.is_empty() {
            return Err(size(format!("field of length {} does not match p = {p}", values.len())));
        }
        Ok(PairField { p, values, kind })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, pair: Pair) -> f64 {
        self.values[pair_index(self.p, pair)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, f64)> + '_ {
        let p = self.p;
        (0..p).flat_map(move |i| (i + 1..p).map(move |j| Pair { i, j })).zip(self.values.iter().copied())
    }
}

/// Split `values` into per-block mutable slices for rows `[start, start + BLOCK)`.
fn row_blocks(p: usize, values: &mut [f64]) -> Vec<(usize, &mut [f64])> {
    let mut out = Vec::new();
    let mut rest = values;
    let mut start = 0;
    while start + 1 < p {
        let end = (start + BLOCK).min(p - 1);
        let len = row_offset(p, end) - row_offset(p, start);
        let (head, tail) = rest.split_at_mut(len);
        out.push((start, head));
        rest = tail;
        start = end;
    }
    out
}

/// Fill a pair field with `g(i, j)` evaluated blockwise: rows of a block are
/// swept against column blocks so both stay cache resident.
fn fill_pairs<G>(p: usize, g: G) -> Vec<f64>
where
    G: Fn(usize, usize) -> f64 + Sync,
{
    let mut values = vec![0.0; p * (p - 1) / 2];
    row_blocks(p, &mut values).into_par_iter().for_each(|(start, out)| {
        let end = (start + BLOCK).min(p - 1);
        let base = row_offset(p, start);
        let mut jb = start + 1;
        while jb < p {
            let je = (jb + BLOCK).min(p);
            for i in start..end {
                let lo = jb.max(i + 1);
                let off = row_offset(p, i) - base;
                for j in lo..je {
                    out[off + j - i - 1] = g(i, j);
                }
            }
            jb = je;
        }
    });
    values
}

#[inline]
fn dot_plain(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let o = 4 * k;
        acc[0] += a[o] * b[o];
        acc[1] += a[o + 1] * b[o + 1];
        acc[2] += a[o + 2] * b[o + 2];
        acc[3] += a[o + 3] * b[o + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Short plain partial sums combined with Neumaier summation.
fn dot_compensated(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for (ca, cb) in a.chunks(256).zip(b.chunks(256)) {
        let x = dot_plain(ca, cb);
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a.len() > COMPENSATED_ABOVE {
        dot_compensated(a, b)
    } else {
        dot_plain(a, b)
    }
}

/// Sum of `f(a_l, b_l)` with the same accumulation scheme as [`dot`].
fn pair_sum<F: Fn(f64, f64) -> f64>(a: &[f64], b: &[f64], f: &F) -> f64 {
    let chunk_sum = |ca: &[f64], cb: &[f64]| {
        let mut acc = [0.0f64; 4];
        let chunks = ca.len() / 4;
        for k in 0..chunks {
            let o = 4 * k;
            for r in 0..4 {
                acc[r] += f(ca[o + r], cb[o + r]);
            }
        }
        let mut tail = 0.0;
        for k in 4 * chunks..ca.len() {
            tail += f(ca[k], cb[k]);
        }
        (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
    };
    if a.len() <= COMPENSATED_ABOVE {
        return chunk_sum(a, b);
    }
    let mut s = 0.0;
    let mut c = 0.0;
    for (ca, cb) in a.chunks(256).zip(b.chunks(256)) {
        let x = chunk_sum(ca, cb);
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// Squared Euclidean distances via `|x_i|^2 + |x_j|^2 - 2 <x_i, x_j>`.
pub fn interpoint_sq_distances(x: &SampleMatrix) -> PairField {
    interpoint_sq_distances_flagged(x).0
}

/// As [`interpoint_sq_distances`], also returning the number of pairs whose
/// Gram value fell below `-1e-8 * (|x_i|^2 + |x_j|^2)` before clamping.
pub fn interpoint_sq_distances_flagged(x: &SampleMatrix) -> (PairField, usize) {
    let p = x.p();
    let norms: Vec<f64> = (0..p).map(|i| dot(x.row(i), x.row(i))).collect();
    let flagged = std::sync::atomic::AtomicUsize::new(0);
    let values = fill_pairs(p, |i, j| {
        let scale = norms[i] + norms[j];
        let v = scale - 2.0 * dot(x.row(i), x.row(j));
        if v < 0.0 {
            if v < -1e-8 * scale {
                flagged.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            }
            0.0
        } else {
            v
        }
    });
    (PairField { p, values, kind: PairKind::SqDist }, flagged.into_inner())
}

/// Squared distances by direct differencing; slower, no cancellation.
pub fn sq_distances_direct(x: &SampleMatrix) -> PairField {
    let values = fill_pairs(x.p(), |i, j| pair_sum(x.row(i), x.row(j), &|a, b| (a - b) * (a - b)));
    PairField { p: x.p(), values, kind: PairKind::SqDist }
}

/// `sum_l |X_il - X_jl|^q` (the q-th power of the q-norm).
pub fn qnorm_distances(x: &SampleMatrix, q: f64) -> Result<PairField> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(crate::error::domain(format!("q = {q} must be >= 1")));
    }
    if q == 2.0 {
        return Ok(interpoint_sq_distances(x));
    }
    let values = if q == 1.0 {
        fill_pairs(x.p(), |i, j| pair_sum(x.row(i), x.row(j), &|a, b| (a - b).abs()))
    } else {
        fill_pairs(x.p(), |i, j| pair_sum(x.row(i), x.row(j), &|a, b| (a - b).abs().powf(q)))
    };
    Ok(PairField { p: x.p(), values, kind: PairKind::QDist(q) })
}

pub type PairFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Summand `f(X_ik, X_jk)` of a pair-indexed random walk.
#[derive(Clone)]
pub enum WalkKind {
    SqDiff,
    Product,
    AbsQ(f64),
    /// Must be symmetric in its arguments.
    Custom(PairFn),
}

impl fmt::Debug for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkKind::SqDiff => write!(f, "SqDiff"),
            WalkKind::Product => write!(f, "Product"),
            WalkKind::AbsQ(q) => write!(f, "AbsQ({q})"),
            WalkKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Raw walk sums `sum_k f(X_ik, X_jk)`.
pub fn walk_sums(x: &SampleMatrix, f: &WalkKind) -> PairField {
    let p = x.p();
    let values = match f {
        WalkKind::SqDiff => fill_pairs(p, |i, j| pair_sum(x.row(i), x.row(j), &|a, b| (a - b) * (a - b))),
        WalkKind::Product => fill_pairs(p, |i, j| dot(x.row(i), x.row(j))),
        WalkKind::AbsQ(q) => {
            let q = *q;
            fill_pairs(p, |i, j| pair_sum(x.row(i), x.row(j), &|a, b| (a - b).abs().powf(q)))
        }
        WalkKind::Custom(g) => fill_pairs(p, |i, j| pair_sum(x.row(i), x.row(j), &|a, b| g(a, b))),
    };
    PairField { p, values, kind: PairKind::Walk }
}

/// `T_ij = (sum_k f(X_ik, X_jk) - n mean_f) / sqrt(n var_f)`.
pub fn standardized_walks(x: &SampleMatrix, f: &WalkKind, mean_f: f64, var_f: f64) -> Result<PairField> {
    if !(var_f > 0.0) || !var_f.is_finite() {
        return Err(Error::Degenerate(format!("var_f = {var_f} must be positive")));
    }
    let n = x.n() as f64;
    let shift = n * mean_f;
    let scale = 1.0 / (n * var_f).sqrt();
    let mut field = walk_sums(x, f);
    for v in &mut field.values {
        *v = (*v - shift) * scale;
    }
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairExtremes {
    pub max_value: f64,
    pub argmax: Pair,
    pub min_value: f64,
    pub argmin: Pair,
    pub normalized_max: Option<f64>,
    pub normalized_min: Option<f64>,
}

/// Max and min with lexicographically smallest argmax/argmin among ties.
pub fn extremes(field: &PairField) -> PairExtremes {
    let (mut kmax, mut kmin) = (0, 0);
    for (k, &v) in field.values.iter().enumerate() {
        if v > field.values[kmax] {
            kmax = k;
        }
        if v < field.values[kmin] {
            kmin = k;
        }
    }
    PairExtremes {
        max_value: field.values[kmax],
        argmax: pair_at(field.p, kmax),
        min_value: field.values[kmin],
        argmin: pair_at(field.p, kmin),
        normalized_max: None,
        normalized_min: None,
    }
}

/// Extremes with norming: `c (max - b)` and `c (min - b) + 2 d^2` for raw
/// fields; `d (max - d)` and `d (min + d)` for standardized walks.
pub fn normalized_extremes(field: &PairField, norm: &Normalizers) -> PairExtremes {
    let mut e = extremes(field);
    let d = norm.d;
    if field.kind == PairKind::Walk {
        e.normalized_max = Some(d * (e.max_value - d));
        e.normalized_min = Some(d * (e.min_value + d));
    } else {
        e.normalized_max = Some(norm.apply(e.max_value));
        e.normalized_min = Some(norm.apply_min(e.min_value));
    }
    e
}

/// Largest off-diagonal entry of `Y^T Y / sqrt(n)` for `Y` with `n` rows
/// (observations) and `p` columns.
pub fn cov_max_offdiag(y: &SampleMatrix) -> Result<(f64, Pair)> {
    let cols = y.transpose()?;
    let field = cov_entries(&cols);
    let e = extremes(&field);
    Ok((e.max_value, e.argmax))
}

/// Off-diagonal entries `n^{-1/2} <c_i, c_j>` for columns stored as rows.
pub fn cov_entries(cols: &SampleMatrix) -> PairField {
    let mut f = walk_sums(cols, &WalkKind::Product);
    let s = 1.0 / (cols.n() as f64).sqrt();
    for v in &mut f.values {
        *v *= s;
    }
    f.kind = PairKind::CovEntry;
    f
}

/// Number of values in each half-open interval `(lo, hi]`.
pub fn exceedance_count(field: &PairField, intervals: &[(f64, f64)]) -> Vec<u64> {
    intervals.iter().map(|&(lo, hi)| field.values.iter().filter(|&&v| v > lo && v <= hi).count() as u64).collect()
}

/// Number of values in the union of the intervals `(lo, hi]`.
pub fn union_count(field: &PairField, intervals: &[(f64, f64)]) -> u64 {
    field.values.iter().filter(|&&v| intervals.iter().any(|&(lo, hi)| v > lo && v <= hi)).count() as u64
}

/// The `k` largest values in decreasing order, ties broken lexicographically.
pub fn top_k(field: &PairField, k: usize) -> Result<Vec<(f64, Pair)>> {
    if k == 0 || k > field.len() {
        return Err(size(format!("k = {k} outside 1..={}", field.len())));
    }
    let cmp = |a: &usize, b: &usize| field.values[*b].total_cmp(&field.values[*a]).then(a.cmp(b));
    let mut idx: Vec<usize> = (0..field.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx.sort_unstable_by(cmp);
    Ok(idx.into_iter().map(|t| (field.values[t], pair_at(field.p, t))).collect())
}
