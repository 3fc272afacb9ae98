//! Monte Carlo experiments. Each returns an [`ExperimentReport`] whose
//! per-replication rows are in replication order.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chenstein::{empirical_tv_distance, histogram, stein_bounds, tv_standard_error};
use crate::error::{Error, Result};
use crate::gauss::{bivariate_orthant_prob, field_exceedance_moments, std_normal_tail, v_moment_asymptotes};
use crate::hypothesis::{cov_regime, detectability_margin, mean_equality_test};
use crate::moments::{classify_regime, Condition, RegimeReport};
use crate::normseq::{d_n1, general_normalizers, interpoint_normalizers, Normalizers};
use crate::pair_count;
use crate::pairstats::{
    cov_max_offdiag, interpoint_sq_distances, normalized_extremes, standardized_walks, top_k, union_count, PairField,
    SampleMatrix, WalkKind,
};

use super::field::{count_field_exceedances, field_max};
use super::ks::{ks_statistic, pearson, spearman, LimitLaw};
use super::rng::rep_rng;
use super::sampler::{equicorr_normal_sample_with, sample_matrix_with, EntryDistribution};

/// Work cap `p^2 n reps` above which experiments refuse to run unless
/// `allow_large` is set.
pub const DESK_SCALE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub enum Statistic {
    /// Squared interpoint distances, normed as `c (D - b)`.
    Interpoint,
    /// Standardized walks `T`, normed as `d (T - d)`.
    Walk(WalkKind),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub distribution: EntryDistribution,
    pub statistic: Statistic,
    pub n: usize,
    pub p: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub allow_large: bool,
}

impl ExperimentConfig {
    pub fn new(
        distribution: EntryDistribution,
        statistic: Statistic,
        n: usize,
        p: usize,
        replications: usize,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig { distribution, statistic, n, p, replications, master_seed, allow_large: false }
    }

    fn validate(&self) -> Result<()> {
        if self.p < 3 || self.n < 1 {
            return Err(Error::Config(format!("need p >= 3 and n >= 1, got p = {}, n = {}", self.p, self.n)));
        }
        guard(self.p, self.n, self.replications, self.allow_large)
    }
}

/// Configuration for experiments on the Gaussian pair field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub p: usize,
    pub rho: f64,
    /// Threshold on the normalized scale `d (Y - d)`.
    pub x: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub allow_large: bool,
}

impl FieldConfig {
    pub fn new(p: usize, rho: f64, x: f64, replications: usize, master_seed: u64) -> Self {
        FieldConfig { p, rho, x, replications, master_seed, allow_large: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovConfig {
    pub n: usize,
    pub p: usize,
    pub rho_n: f64,
    pub lambda_hint: Option<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub allow_large: bool,
}

fn guard(p: usize, n: usize, reps: usize, allow_large: bool) -> Result<()> {
    if reps == 0 {
        return Err(Error::Config("replications must be >= 1".into()));
    }
    let work = (p as f64).powi(2) * n as f64 * reps as f64;
    if work > DESK_SCALE_LIMIT && !allow_large {
        return Err(Error::Config(format!(
            "p^2 n reps = {work:.3e} exceeds {DESK_SCALE_LIMIT:.0e}; set the override to run anyway"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountSummary {
    pub region: String,
    pub target_mean: f64,
    pub mean: f64,
    pub se: f64,
    pub histogram: Vec<u64>,
    pub tv_to_poisson: f64,
    pub tv_se: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub replications: usize,
    pub master_seed: u64,
    pub sample_columns: Vec<String>,
    /// One row per replication.
    pub samples: Vec<Vec<f64>>,
    pub ks: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    pub counts: Vec<CountSummary>,
    pub warnings: Vec<String>,
    pub runtime_secs: Option<f64>,
}

impl ExperimentReport {
    fn new(name: &str, replications: usize, master_seed: u64, columns: &[&str]) -> Self {
        ExperimentReport {
            experiment: name.to_string(),
            replications,
            master_seed,
            sample_columns: columns.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|r| r[k]).collect()
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }
}

/// Run `f` once per replication on its own stream, in parallel, returning
/// results in replication order.
fn run_reps<T, F>(reps: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..reps).into_par_iter().map(|r| f(&mut rep_rng(seed, r as u64))).collect()
}

/// Run `f` on a dedicated pool with `threads` workers (0 means the rayon
/// default).
pub fn run_with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Norming and field construction shared by the sample-based experiments.
struct Prepared {
    norm: Normalizers,
    walk: Option<(WalkKind, f64, f64)>,
    warnings: Vec<String>,
}

impl Prepared {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let mut warnings = Vec::new();
        match &cfg.statistic {
            Statistic::Interpoint => {
                let profile = cfg.distribution.profile();
                let regime = match classify_regime(&profile, cfg.n, cfg.p) {
                    Ok(r) => r,
                    Err(Error::NoCondition(msg)) => {
                        warnings.push(format!("no moment condition applies ({msg}); using d_n1 norming"));
                        RegimeReport { condition: Condition::B1, rate_exponent: f64::NAN, dnorm_choice: false }
                    }
                    Err(e) => return Err(e),
                };
                let norm = interpoint_normalizers(cfg.n, cfg.p, &profile, &regime)?;
                Ok(Prepared { norm, walk: None, warnings })
            }
            Statistic::Walk(kind) => {
                let (mean, var) = cfg.distribution.walk_moments(kind)?;
                let norm = general_normalizers(cfg.n, cfg.p, mean, var)?;
                Ok(Prepared { norm, walk: Some((kind.clone(), mean, var)), warnings })
            }
        }
    }

    fn field(&self, cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<PairField> {
        let x = sample_matrix_with(&cfg.distribution, cfg.p, cfg.n, rng)?;
        self.field_of(&x)
    }

    fn field_of(&self, x: &SampleMatrix) -> Result<PairField> {
        match &self.walk {
            None => Ok(interpoint_sq_distances(x)),
            Some((kind, mean, var)) => standardized_walks(x, kind, *mean, *var),
        }
    }

    /// Maximum-side norming of a single field value.
    fn norm_value(&self, v: f64) -> f64 {
        match self.walk {
            None => self.norm.apply(v),
            Some(_) => self.norm.d * (v - self.norm.d),
        }
    }
}

/// Normalized maximum of each replication against the Gumbel law.
pub fn gumbel_convergence_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let prep = Prepared::new(cfg)?;
    let rows = run_reps(cfg.replications, cfg.master_seed, |rng| {
        let f = prep.field(cfg, rng)?;
        Ok(vec![normalized_extremes(&f, &prep.norm).normalized_max.unwrap_or(f64::NAN)])
    })?;
    let mut r = ExperimentReport::new("gumbel", cfg.replications, cfg.master_seed, &["normalized_max"]);
    r.samples = rows;
    r.warnings = prep.warnings;
    let xs = r.column(0);
    r.ks.insert("gumbel".into(), ks_statistic(&xs, &LimitLaw::Gumbel)?);
    let (m, sd) = mean_sd(&xs);
    r.metric("mean", m);
    r.metric("sd", sd);
    r.metric("b", prep.norm.b);
    r.metric("c", prep.norm.c);
    r.metric("d", prep.norm.d);
    Ok(r)
}

/// `(d (max T - d), d (min T + d))` per replication; marginal KS against the
/// Gumbel and negated Gumbel laws and their rank correlation.
pub fn joint_minmax_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !matches!(cfg.statistic, Statistic::Walk(_)) {
        return Err(Error::Config("joint max/min needs a walk statistic".into()));
    }
    let prep = Prepared::new(cfg)?;
    let rows = run_reps(cfg.replications, cfg.master_seed, |rng| {
        let f = prep.field(cfg, rng)?;
        let e = normalized_extremes(&f, &prep.norm);
        Ok(vec![e.normalized_max.unwrap_or(f64::NAN), e.normalized_min.unwrap_or(f64::NAN)])
    })?;
    let mut r =
        ExperimentReport::new("joint", cfg.replications, cfg.master_seed, &["normalized_max", "normalized_min"]);
    r.samples = rows;
    let (mx, mn) = (r.column(0), r.column(1));
    r.ks.insert("max_vs_gumbel".into(), ks_statistic(&mx, &LimitLaw::Gumbel)?);
    r.ks.insert("min_vs_neg_gumbel".into(), ks_statistic(&mn, &LimitLaw::NegGumbel)?);
    if mx.len() >= 2 {
        r.metric("rank_correlation", spearman(&mx, &mn)?);
    }
    r.metric("d", prep.norm.d);
    Ok(r)
}

pub enum FirstOrderSource {
    Field(FieldConfig),
    Walk(ExperimentConfig),
}

/// `max / sqrt(log p)` per replication; its limit is 2 for every `rho`.
pub fn first_order_experiment(source: &FirstOrderSource) -> Result<ExperimentReport> {
    let (p, reps, seed, rows) = match source {
        FirstOrderSource::Field(fc) => {
            guard(fc.p, 1, fc.replications, fc.allow_large)?;
            let s = (fc.p as f64).ln().sqrt();
            let rows = run_reps(fc.replications, fc.master_seed, |rng| Ok(vec![field_max(fc.p, fc.rho, rng)? / s]))?;
            (fc.p, fc.replications, fc.master_seed, rows)
        }
        FirstOrderSource::Walk(cfg) => {
            let Statistic::Walk(_) = cfg.statistic else {
                return Err(Error::Config("first-order experiment needs a walk statistic or a field".into()));
            };
            let prep = Prepared::new(cfg)?;
            let s = (cfg.p as f64).ln().sqrt();
            let rows = run_reps(cfg.replications, cfg.master_seed, |rng| {
                let f = prep.field(cfg, rng)?;
                Ok(vec![crate::pairstats::extremes(&f).max_value / s])
            })?;
            (cfg.p, cfg.replications, cfg.master_seed, rows)
        }
    };
    let mut r = ExperimentReport::new("first-order", reps, seed, &["max_over_sqrt_log_p"]);
    r.samples = rows;
    let (m, sd) = mean_sd(&r.column(0));
    r.metric("mean", m);
    r.metric("sd", sd);
    r.metric("p", p as f64);
    r.metric("target", 2.0);
    Ok(r)
}

/// Finite union of intervals `(lo, hi]` on the normalized scale; `hi` may be
/// `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub intervals: Vec<(f64, f64)>,
}

impl Region {
    pub fn tail(x: f64) -> Self {
        Region { intervals: vec![(x, f64::INFINITY)] }
    }

    fn validate(&self) -> Result<()> {
        if self.intervals.is_empty() {
            return Err(Error::Config("empty region".into()));
        }
        let mut iv = self.intervals.clone();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in iv.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::Config("region intervals overlap".into()));
            }
        }
        for &(lo, hi) in &iv {
            if !lo.is_finite() || !(hi > lo) {
                return Err(Error::Config(format!("malformed interval ({lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Mean measure `sum e^{-lo} - e^{-hi}`.
    pub fn mean_measure(&self) -> f64 {
        self.intervals.iter().map(|&(lo, hi)| (-lo).exp() - (-hi).exp()).sum()
    }

    pub fn label(&self) -> String {
        self.intervals.iter().map(|(lo, hi)| format!("({lo},{hi}]")).collect::<Vec<_>>().join("u")
    }
}

fn count_summary(region: String, target: f64, counts: &[u64]) -> Result<CountSummary> {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean, sd) = mean_sd(&xs);
    let hist = histogram(counts);
    let tv = if target > 0.0 { empirical_tv_distance(&hist, target)? } else { f64::NAN };
    Ok(CountSummary {
        region,
        target_mean: target,
        mean,
        se: sd / (xs.len() as f64).sqrt(),
        tv_se: tv_standard_error(&hist),
        histogram: hist,
        tv_to_poisson: tv,
    })
}

/// Exceedance counts of the normalized field in each region.
pub fn point_process_experiment(cfg: &ExperimentConfig, regions: &[Region]) -> Result<ExperimentReport> {
    if regions.is_empty() {
        return Err(Error::Config("no regions".into()));
    }
    for reg in regions {
        reg.validate()?;
    }
    let prep = Prepared::new(cfg)?;
    let rows = run_reps(cfg.replications, cfg.master_seed, |rng| {
        let mut f = prep.field(cfg, rng)?;
        for v in &mut f.values {
            *v = prep.norm_value(*v);
        }
        Ok(regions.iter().map(|reg| union_count(&f, &reg.intervals) as f64).collect::<Vec<_>>())
    })?;
    let labels: Vec<String> = regions.iter().map(Region::label).collect();
    let cols: Vec<&str> = labels.iter().map(String::as_str).collect();
    let mut r = ExperimentReport::new("pointprocess", cfg.replications, cfg.master_seed, &cols);
    r.samples = rows;
    r.warnings = prep.warnings.clone();
    for (k, reg) in regions.iter().enumerate() {
        let counts: Vec<u64> = r.column(k).iter().map(|&c| c as u64).collect();
        r.counts.push(count_summary(labels[k].clone(), reg.mean_measure(), &counts)?);
    }
    for a in 0..regions.len() {
        for b in a + 1..regions.len() {
            r.metric(&format!("corr[{},{}]", labels[a], labels[b]), pearson(&r.column(a), &r.column(b)));
        }
    }
    Ok(r)
}

/// Top-`k` normalized values per replication; the `i`-th against the law of
/// `-log(E_1 + ... + E_i)`.
pub fn order_stats_experiment(cfg: &ExperimentConfig, k: usize) -> Result<ExperimentReport> {
    if k == 0 || k > 5 {
        return Err(Error::Config(format!("k = {k} outside 1..=5")));
    }
    if k as u64 > pair_count(cfg.p) {
        return Err(crate::error::size(format!("k = {k} exceeds the number of pairs")));
    }
    let prep = Prepared::new(cfg)?;
    let rows = run_reps(cfg.replications, cfg.master_seed, |rng| {
        let f = prep.field(cfg, rng)?;
        Ok(top_k(&f, k)?.into_iter().map(|(v, _)| prep.norm_value(v)).collect::<Vec<_>>())
    })?;
    let labels: Vec<String> = (1..=k).map(|i| format!("order_{i}")).collect();
    let cols: Vec<&str> = labels.iter().map(String::as_str).collect();
    let mut r = ExperimentReport::new("orderstats", cfg.replications, cfg.master_seed, &cols);
    r.samples = rows;
    r.warnings = prep.warnings;
    for (i, label) in labels.iter().enumerate() {
        r.ks.insert(label.clone(), ks_statistic(&r.column(i), &LimitLaw::NegLogGamma { k: i as u32 + 1 })?);
    }
    Ok(r)
}

/// Exceedance count `V = #{pairs : d (Y - d) > x}` of the Gaussian pair field.
/// Reports the first two empirical moments with their limits, the exact
/// finite-`p` moments, and the Poisson approximation diagnostics.
pub fn v_moment_experiment(fc: &FieldConfig) -> Result<ExperimentReport> {
    guard(fc.p, 1, fc.replications, fc.allow_large)?;
    if fc.p < 3 {
        return Err(Error::Config("p must be >= 3".into()));
    }
    let m = pair_count(fc.p);
    let d = d_n1(m)?;
    let u = d + fc.x / d;
    let counts = run_reps(fc.replications, fc.master_seed, |rng| count_field_exceedances(fc.p, fc.rho, u, rng))?;
    let mut r = ExperimentReport::new("vmoment", fc.replications, fc.master_seed, &["v"]);
    r.samples = counts.iter().map(|&c| vec![c as f64]).collect();
    let n = counts.len() as f64;
    let v: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let v2: Vec<f64> = v.iter().map(|x| x * x).collect();
    let (m1, sd1) = mean_sd(&v);
    let (m2, sd2) = mean_sd(&v2);
    let (a1, a2) = v_moment_asymptotes(fc.p, fc.rho, fc.x)?;
    let (e1, e2) = field_exceedance_moments(fc.p, fc.rho, u)?;
    r.metric("mean_v", m1);
    r.metric("se_mean_v", sd1 / n.sqrt());
    r.metric("second_v", m2);
    r.metric("se_second_v", sd2 / n.sqrt());
    r.metric("limit_mean", a1);
    r.metric("limit_second", a2);
    r.metric("exact_mean", e1);
    r.metric("exact_second", e2);
    r.metric("u", u);
    let marginal = std_normal_tail(u);
    let joint = bivariate_orthant_prob(fc.rho, u)?;
    let cs = stein_bounds(fc.p, marginal, joint, 0.0)?;
    r.metric("stein_lambda", cs.lambda);
    r.metric("stein_count_bound", cs.total_count_version);
    r.metric("stein_max_bound", cs.total_max_version);
    let hist = histogram(&counts);
    r.metric("tv_to_poisson_lambda", empirical_tv_distance(&hist, cs.lambda)?);
    r.metric("tv_to_poisson_limit", empirical_tv_distance(&hist, a1)?);
    r.counts.push(count_summary(format!("({},inf)", fc.x), a1, &counts)?);
    Ok(r)
}

/// Largest off-diagonal sample covariance entry of equicorrelated normal
/// data, normalized for the declared regime.
pub fn cov_regime_experiment(cc: &CovConfig) -> Result<ExperimentReport> {
    guard(cc.p, cc.n, cc.replications, cc.allow_large)?;
    let reg = cov_regime(cc.rho_n, cc.p, cc.n, cc.lambda_hint).map_err(|e| Error::Config(e.to_string()))?;
    let rows = run_reps(cc.replications, cc.master_seed, |rng| {
        let y = equicorr_normal_sample_with(cc.n, cc.p, cc.rho_n, rng)?;
        let (w, _) = cov_max_offdiag(&y)?;
        Ok(vec![reg.normalize(w), w])
    })?;
    let mut r = ExperimentReport::new("cov-regime", cc.replications, cc.master_seed, &["normalized", "w"]);
    r.samples = rows;
    let xs = r.column(0);
    let law = match reg.limit_law {
        crate::hypothesis::LimitLawKind::Gumbel => LimitLaw::Gumbel,
        crate::hypothesis::LimitLawKind::NormalPlusScaledGumbel(lambda) => LimitLaw::Convolution { lambda },
        crate::hypothesis::LimitLawKind::Normal => LimitLaw::Normal,
    };
    r.ks.insert("limit_law".into(), ks_statistic(&xs, &law)?);
    let (m, sd) = mean_sd(&xs);
    r.metric("mean", m);
    r.metric("sd", sd);
    r.metric("mu_n", reg.mu_n);
    r.metric("scale", reg.scale);
    r.metric(
        "regime",
        match reg.regime {
            crate::hypothesis::Regime::I => 1.0,
            crate::hypothesis::Regime::II => 2.0,
            crate::hypothesis::Regime::III => 3.0,
        },
    );
    Ok(r)
}

/// Rejection rate of the max-distance mean test. With `mu_diff_sq > 0`, the
/// first observation's mean is shifted by a constant vector of squared norm
/// `mu_diff_sq`.
pub fn mean_test_experiment(cfg: &ExperimentConfig, alpha: f64, mu_diff_sq: f64) -> Result<ExperimentReport> {
    cfg.validate()?;
    if !(mu_diff_sq >= 0.0) {
        return Err(Error::Config("mu_diff_sq must be >= 0".into()));
    }
    let profile = cfg.distribution.profile();
    let regime = classify_regime(&profile, cfg.n, cfg.p)?;
    let shift = (mu_diff_sq / cfg.n as f64).sqrt();
    let rows = run_reps(cfg.replications, cfg.master_seed, |rng| {
        let x = sample_matrix_with(&cfg.distribution, cfg.p, cfg.n, rng)?;
        let x = if shift > 0.0 {
            let mut data = x.data().to_vec();
            for v in &mut data[..cfg.n] {
                *v += shift;
            }
            SampleMatrix::new(cfg.p, cfg.n, data)?
        } else {
            x
        };
        let t = mean_equality_test(&x, &profile, alpha, &regime)?;
        Ok(vec![t.statistic, if t.reject { 1.0 } else { 0.0 }])
    })?;
    let mut r = ExperimentReport::new("mean-test", cfg.replications, cfg.master_seed, &["statistic", "reject"]);
    r.samples = rows;
    let rej = r.column(1);
    let rate = rej.iter().sum::<f64>() / rej.len() as f64;
    r.metric("rejection_rate", rate);
    r.metric("se", (rate * (1.0 - rate) / rej.len() as f64).sqrt());
    r.metric("alpha", alpha);
    r.metric("margin", detectability_margin(mu_diff_sq, cfg.n, cfg.p));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(stat: Statistic) -> ExperimentConfig {
        ExperimentConfig::new(EntryDistribution::Gaussian, stat, 50, 12, 40, 3)
    }

    #[test]
    fn single_replication_ks_is_degenerate() {
        let mut cfg = small(Statistic::Interpoint);
        cfg.replications = 1;
        let r = gumbel_convergence_experiment(&cfg).unwrap();
        assert_eq!(r.samples.len(), 1);
        let f = crate::gauss::gumbel_cdf(r.samples[0][0]);
        assert!((r.ks["gumbel"] - f.max(1.0 - f)).abs() < 1e-15);
    }

    #[test]
    fn reports_are_thread_count_independent() {
        let cfg = small(Statistic::Walk(WalkKind::Product));
        let a = run_with_threads(1, || joint_minmax_experiment(&cfg).unwrap()).unwrap();
        let b = run_with_threads(3, || joint_minmax_experiment(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        let fc = FieldConfig::new(50, 0.3, 0.0, 30, 8);
        let a = run_with_threads(1, || v_moment_experiment(&fc).unwrap()).unwrap();
        let b = run_with_threads(4, || v_moment_experiment(&fc).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn min_is_negated_max_of_negated_field() {
        let cfg = small(Statistic::Walk(WalkKind::SqDiff));
        let prep = Prepared::new(&cfg).unwrap();
        for r in 0..5 {
            let f = prep.field(&cfg, &mut rep_rng(1, r)).unwrap();
            let mut neg = f.clone();
            neg.values.iter_mut().for_each(|v| *v = -*v);
            let e = crate::pairstats::extremes(&f);
            assert_eq!(e.min_value, -crate::pairstats::extremes(&neg).max_value);
        }
    }

    #[test]
    fn order_stats_rows_nonincreasing() {
        let cfg = small(Statistic::Walk(WalkKind::Product));
        let r = order_stats_experiment(&cfg, 3).unwrap();
        assert!(r.samples.iter().all(|row| row.windows(2).all(|w| w[0] >= w[1])));
        assert!(order_stats_experiment(&cfg, 6).is_err());
        let k1 = order_stats_experiment(&cfg, 1).unwrap();
        let g = gumbel_convergence_experiment(&cfg).unwrap();
        assert_eq!(k1.column(0), g.column(0));
    }

    #[test]
    fn region_checks() {
        assert!((Region { intervals: vec![(0.0, 1.0)] }.mean_measure() - 0.632_120_558_828_557_7).abs() < 1e-12);
        assert!((Region::tail(0.0).mean_measure() - 1.0).abs() < 1e-15);
        let cfg = small(Statistic::Walk(WalkKind::Product));
        assert!(point_process_experiment(&cfg, &[Region { intervals: vec![(1.0, 0.0)] }]).is_err());
        assert!(point_process_experiment(&cfg, &[Region { intervals: vec![(0.0, 2.0), (1.0, 3.0)] }]).is_err());
        let r = point_process_experiment(&cfg, &[Region::tail(0.0), Region { intervals: vec![(-1.0, 0.0)] }]).unwrap();
        assert_eq!(r.counts.len(), 2);
    }

    #[test]
    fn config_errors() {
        let mut cfg = small(Statistic::Interpoint);
        cfg.replications = 0;
        assert!(matches!(gumbel_convergence_experiment(&cfg), Err(Error::Config(_))));
        let mut big = small(Statistic::Interpoint);
        big.p = 10_000;
        big.n = 10_000;
        big.replications = 1000;
        assert!(matches!(gumbel_convergence_experiment(&big), Err(Error::Config(_))));
        assert!(matches!(joint_minmax_experiment(&small(Statistic::Interpoint)), Err(Error::Config(_))));
        assert!(v_moment_experiment(&FieldConfig::new(10, 0.2, 0.0, 0, 1)).is_err());
        assert!(v_moment_experiment(&FieldConfig::new(10, 0.7, 0.0, 5, 1)).is_err());
    }

    #[test]
    fn heavy_fourth_moment_warns() {
        let d = EntryDistribution::custom(vec![-3.0, 0.0, 3.0], vec![1.0 / 18.0, 16.0 / 18.0, 1.0 / 18.0]).unwrap();
        let cfg = ExperimentConfig::new(d, Statistic::Interpoint, 30, 8, 5, 1);
        let r = gumbel_convergence_experiment(&cfg).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn slepian_ordering_empirical() {
        let (p, t, reps) = (30usize, 4.2, 3000u64);
        let prob = |rho: f64| {
            (0..reps).filter(|&r| field_max(p, rho, &mut rep_rng(21, r)).unwrap() <= t).count() as f64 / reps as f64
        };
        let (a, b, c) = (prob(0.0), prob(0.25), prob(0.5));
        let se = (0.25 / reps as f64).sqrt();
        assert!(a <= b + 3.0 * se && b <= c + 3.0 * se, "{a} {b} {c}");
        assert!(a < c);
    }
}
