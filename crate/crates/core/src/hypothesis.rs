//! The max-distance test for equality of means and the regimes of the
//! largest off-diagonal sample covariance entry.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::gauss::gumbel_quantile;
use crate::moments::{MomentProfile, RegimeReport};
use crate::normseq::{d_n1, interpoint_normalizers, Normalizers};
use crate::pair_count;
use crate::pairstats::{interpoint_sq_distances, normalized_extremes, Pair, SampleMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanTestResult {
    /// Maximum squared interpoint distance.
    pub statistic: f64,
    /// `q_{1-alpha} / c + b`.
    pub threshold: f64,
    pub alpha: f64,
    pub reject: bool,
    pub argmax_pair: Pair,
    pub normalizers: Normalizers,
}

/// `q_{1-alpha} / c + b`.
pub fn mean_test_threshold(norm: &Normalizers, alpha: f64) -> Result<f64> {
    Ok(gumbel_quantile(alpha)? / norm.c + norm.b)
}

/// Reject equality of the `p` mean vectors when the maximum squared distance
/// exceeds the Gumbel threshold. The entry moments are assumed known.
pub fn mean_equality_test(
    x: &SampleMatrix,
    profile: &MomentProfile,
    alpha: f64,
    regime: &RegimeReport,
) -> Result<MeanTestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    let norm = interpoint_normalizers(x.n(), x.p(), profile, regime)?;
    let threshold = mean_test_threshold(&norm, alpha)?;
    let e = normalized_extremes(&interpoint_sq_distances(x), &norm);
    Ok(MeanTestResult {
        statistic: e.max_value,
        threshold,
        alpha,
        reject: e.max_value > threshold,
        argmax_pair: e.argmax,
        normalizers: norm,
    })
}

/// `|mu_i - mu_j|^2 / sqrt(n max(log p, n))`; power tends to one when this
/// diverges.
pub fn detectability_margin(mu_diff_sq: f64, n: usize, p: usize) -> f64 {
    let n = n as f64;
    mu_diff_sq / (n * (p as f64).ln().max(n)).sqrt()
}

/// Pooled fourth moment of the entries after centring each row and scaling to
/// unit variance. A plug-in helper only; the test's level guarantee assumes
/// the true moment.
pub fn estimate_m4(x: &SampleMatrix) -> f64 {
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    for i in 0..x.p() {
        let row = x.row(i);
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        for &v in row {
            let c = v - mean;
            s2 += c * c;
            s4 += c * c * c * c;
        }
    }
    let total = (x.p() * x.n()) as f64;
    let var = s2 / total;
    (s4 / total) / (var * var)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    I,
    II,
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", content = "lambda")]
pub enum LimitLawKind {
    Gumbel,
    /// `N(0,1) + G / (sqrt(8) lambda)` with independent summands.
    NormalPlusScaledGumbel(f64),
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovRegime {
    pub regime: Regime,
    pub lambda: Option<f64>,
    pub mu_n: f64,
    /// `d_n` in regime I, `sqrt(2) rho_n` otherwise.
    pub scale: f64,
    pub d_n: f64,
    pub limit_law: LimitLawKind,
}

impl CovRegime {
    /// The normalized statistic whose law is `limit_law`.
    pub fn normalize(&self, w: f64) -> f64 {
        match self.regime {
            Regime::I => self.scale * (w - self.mu_n),
            Regime::II | Regime::III => (w - self.mu_n) / self.scale,
        }
    }
}

/// Centering and regime for the largest off-diagonal sample covariance entry
/// under equicorrelation `rho_n`.
///
/// The regime depends on the limit of `rho_n sqrt(log p)`, which no finite
/// `(rho_n, p)` determines. `lambda_hint` declares it: `0` for regime I, a
/// finite positive value for regime II, `+inf` for regime III. Without a
/// hint, `rho_n = 0` is regime I and any positive `rho_n` is taken as a fixed
/// constant, hence regime III.
pub fn cov_regime(rho_n: f64, p: usize, n: usize, lambda_hint: Option<f64>) -> Result<CovRegime> {
    if !(0.0..0.5).contains(&rho_n) {
        return Err(domain(format!("rho_n = {rho_n} outside [0, 1/2)")));
    }
    if p < 3 {
        return Err(crate::error::size(format!("p = {p} < 3")));
    }
    if let Some(h) = lambda_hint {
        if !(h >= 0.0) {
            return Err(domain(format!("lambda hint {h} must be >= 0")));
        }
    }
    let d_n = d_n1(pair_count(p))?;
    let mu_n = (n as f64).sqrt() * rho_n
        + (1.0 - rho_n) * d_n
        + 2.0 * (rho_n * (1.0 - rho_n)).sqrt() * (2.0 * (p as f64).ln()).sqrt();
    let regime = match lambda_hint {
        Some(0.0) => Regime::I,
        Some(h) if h.is_finite() => Regime::II,
        Some(_) => Regime::III,
        None if rho_n == 0.0 => Regime::I,
        None => Regime::III,
    };
    if regime != Regime::I && rho_n == 0.0 {
        return Err(domain("regimes II and III need rho_n > 0"));
    }
    let (scale, lambda, limit_law) = match regime {
        Regime::I => (d_n, Some(0.0), LimitLawKind::Gumbel),
        Regime::II => {
            let l = lambda_hint.unwrap_or_default();
            (2f64.sqrt() * rho_n, Some(l), LimitLawKind::NormalPlusScaledGumbel(l))
        }
        Regime::III => (2f64.sqrt() * rho_n, None, LimitLawKind::Normal),
    };
    Ok(CovRegime { regime, lambda, mu_n, scale, d_n, limit_law })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::classify_regime;
    use crate::normseq::DKind;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn gauss_matrix(p: usize, n: usize, seed: u64) -> SampleMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        SampleMatrix::new(p, n, (0..p * n).map(|_| StandardNormal.sample(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn threshold_chain() {
        let g = MomentProfile::gaussian();
        let reg = classify_regime(&g, 100, 10).unwrap();
        let nz = interpoint_normalizers(100, 10, &g, &reg).unwrap();
        assert_relative_eq!(nz.d, 2.058_344_484_3, epsilon = 1e-9);
        assert_relative_eq!(nz.c, 0.072_773_467_1, epsilon = 1e-10);
        assert_relative_eq!(nz.b, 258.218_773_714, epsilon = 1e-8);
        let th = mean_test_threshold(&nz, 0.05).unwrap();
        assert_relative_eq!(th, 299.033_034_263, epsilon = 1e-8);
        assert!(310.0 > th && 250.0 < th);
    }

    #[test]
    fn test_decision_matches_threshold() {
        let g = MomentProfile::gaussian();
        let x = gauss_matrix(10, 100, 1);
        let reg = classify_regime(&g, 100, 10).unwrap();
        let r = mean_equality_test(&x, &g, 0.05, &reg).unwrap();
        assert_eq!(r.reject, r.statistic > r.threshold);
        assert_eq!(r.normalizers.d_kind, DKind::DN1);
        assert!(mean_equality_test(&x, &g, 1.0, &reg).is_err());
        assert!(mean_equality_test(&x, &g, 0.0, &reg).is_err());
    }

    #[test]
    fn margin_examples() {
        assert_relative_eq!(detectability_margin(1000.0, 100, 100), 10.0, epsilon = 1e-12);
        assert_eq!(detectability_margin(0.0, 100, 100), 0.0);
        assert_relative_eq!(
            detectability_margin(50.0, 200, 30),
            detectability_margin(50.0, 100, 30) / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn m4_estimate_near_three() {
        let x = gauss_matrix(50, 2000, 3);
        assert!((estimate_m4(&x) - 3.0).abs() < 0.1);
    }

    #[test]
    fn cov_regime_examples() {
        let (p, n) = (60, 1000);
        let r = cov_regime(0.0, p, n, None).unwrap();
        assert_eq!(r.regime, Regime::I);
        assert_eq!(r.mu_n, r.d_n);
        assert_eq!(r.scale, r.d_n);
        assert_eq!(r.limit_law, LimitLawKind::Gumbel);

        let rho = 1.0 / (p as f64).ln().sqrt();
        let r = cov_regime(rho, p, n, Some(1.0)).unwrap();
        assert_eq!(r.regime, Regime::II);
        assert_eq!(r.limit_law, LimitLawKind::NormalPlusScaledGumbel(1.0));
        assert_relative_eq!(r.scale, 2f64.sqrt() * rho);

        let r = cov_regime(0.3, p, n, None).unwrap();
        assert_eq!(r.regime, Regime::III);
        assert_eq!(r.limit_law, LimitLawKind::Normal);
        let d = d_n1(pair_count(p)).unwrap();
        let mu = 1000f64.sqrt() * 0.3 + 0.7 * d + 2.0 * (0.21f64).sqrt() * (2.0 * 60f64.ln()).sqrt();
        assert_relative_eq!(r.mu_n, mu, epsilon = 1e-12);

        assert!(cov_regime(0.5, p, n, None).is_err());
        assert!(cov_regime(0.0, p, n, Some(2.0)).is_err());
        assert_eq!(cov_regime(0.1, p, n, Some(f64::INFINITY)).unwrap().regime, Regime::III);
        assert_eq!(cov_regime(0.1, p, n, Some(0.0)).unwrap().regime, Regime::I);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn invariant_under_common_shift(seed in any::<u64>(), shift in proptest::collection::vec(-5.0f64..5.0, 40)) {
            let g = MomentProfile::gaussian();
            let x = gauss_matrix(8, 40, seed);
            let shifted: Vec<f64> = x.data().chunks(40).flat_map(|r| r.iter().zip(&shift).map(|(a, b)| a + b).collect::<Vec<_>>()).collect();
            let y = SampleMatrix::new(8, 40, shifted).unwrap();
            let reg = classify_regime(&g, 40, 8).unwrap();
            let a = mean_equality_test(&x, &g, 0.05, &reg).unwrap();
            let b = mean_equality_test(&y, &g, 0.05, &reg).unwrap();
            prop_assert!((a.statistic - b.statistic).abs() <= 1e-9 * a.statistic);
            prop_assert_eq!(a.argmax_pair, b.argmax_pair);
        }
    }
}
