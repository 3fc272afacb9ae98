//! Centering and scaling sequences.
//!
//! `d_n1` takes the pair count directly; the wrappers compute
//! `p~ = p(p-1)/2` in integer arithmetic first. All logs are natural.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::moments::{MomentProfile, RegimeReport};
use crate::pair_count;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "y")]
pub enum DKind {
    #[serde(rename = "d_n1")]
    DN1,
    #[serde(rename = "d_n_y")]
    DNY(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalizers {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub d_kind: DKind,
}

impl Normalizers {
    /// `c (x - b)`.
    pub fn apply(&self, x: f64) -> f64 {
        self.c * (x - self.b)
    }

    /// Norming for the minimum of the same field: `c (x - b) + 2 d^2`,
    /// which equals `d (T + d)` for the standardized statistic `T`.
    pub fn apply_min(&self, x: f64) -> f64 {
        self.c * (x - self.b) + 2.0 * self.d * self.d
    }
}

fn dn_formula(m: f64) -> f64 {
    let l = 2.0 * m.ln();
    l.sqrt() - (m.ln().ln() + (4.0 * std::f64::consts::PI).ln()) / (2.0 * l.sqrt())
}

fn positive(d: f64) -> Result<f64> {
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(domain(format!("d-sequence value {d} is not positive; the asymptotic norming is undefined here")))
    }
}

/// `sqrt(2 log m) - (log log m + log 4 pi) / (2 sqrt(2 log m))`.
///
/// Small `m` can give `d <= 0`; that is returned as is here and rejected by
/// the normalizer constructors.
pub fn d_n1(m: u64) -> Result<f64> {
    if m < 2 {
        return Err(domain(format!("d_n1 needs m >= 2, got {m}")));
    }
    Ok(dn_formula(m as f64))
}

/// Same functional form as [`d_n1`], evaluated at the dimension `p`.
pub fn d_n2(p: u64) -> Result<f64> {
    if p < 2 {
        return Err(domain(format!("d_n2 needs p >= 2, got {p}")));
    }
    Ok(dn_formula(p as f64))
}

/// Skewness-corrected sequence `d_n1(p~) + y log(p~) / (3 sqrt n)`.
pub fn d_n_y(p: usize, n: usize, y: f64) -> Result<f64> {
    if p < 3 {
        return Err(domain(format!("d_n_y needs p >= 3, got {p}")));
    }
    if n < 1 {
        return Err(domain("d_n_y needs n >= 1"));
    }
    let m = pair_count(p);
    Ok(d_n1(m)? + y * (m as f64).ln() / (3.0 * (n as f64).sqrt()))
}

/// Norming constants for the maximum squared interpoint distance.
pub fn interpoint_normalizers(
    n: usize,
    p: usize,
    profile: &MomentProfile,
    regime: &RegimeReport,
) -> Result<Normalizers> {
    if p < 3 {
        return Err(domain(format!("p = {p} < 3")));
    }
    if !profile.m4.is_finite() {
        return Err(domain("m4 must be finite"));
    }
    let (d, kind) = if regime.dnorm_choice {
        let kappa = profile.kappa_tilde()?;
        (d_n_y(p, n, kappa)?, DKind::DNY(kappa))
    } else {
        (d_n1(pair_count(p))?, DKind::DN1)
    };
    interpoint_with_d(n, profile.m4, d, kind)
}

/// Interpoint constants for an externally supplied `d`.
pub fn interpoint_with_d(n: usize, m4: f64, d: f64, kind: DKind) -> Result<Normalizers> {
    let d = positive(d)?;
    let s = (2.0 * n as f64 * (m4 + 1.0)).sqrt();
    Ok(Normalizers { b: 2.0 * n as f64 + s * d, c: d / s, d, d_kind: kind })
}

/// Norming constants for the maximum of `sum_k |X_ki - X_kj|^q`.
pub fn qnorm_normalizers(n: usize, p: usize, mean_absq: f64, var_absq: f64) -> Result<Normalizers> {
    if !(mean_absq > 0.0) {
        return Err(Error::Degenerate(format!("E|X-Y|^q = {mean_absq} must be positive")));
    }
    general_normalizers(n, p, mean_absq, var_absq)
}

/// `b = n mean_f + sqrt(n var_f) d`, `c = d / sqrt(n var_f)` with `d = d_n1(p~)`.
pub fn general_normalizers(n: usize, p: usize, mean_f: f64, var_f: f64) -> Result<Normalizers> {
    if !(var_f > 0.0) || !var_f.is_finite() {
        return Err(Error::Degenerate(format!("variance {var_f} must be positive")));
    }
    if !mean_f.is_finite() {
        return Err(domain("mean must be finite"));
    }
    if p < 2 {
        return Err(domain(format!("p = {p} < 2")));
    }
    let d = positive(d_n1(pair_count(p))?)?;
    let s = (n as f64 * var_f).sqrt();
    Ok(Normalizers { b: n as f64 * mean_f + s * d, c: d / s, d, d_kind: DKind::DN1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{classify_regime, TailClass};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn phibar(x: f64) -> f64 {
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn d_n1_values() {
        // Frozen from an independent mpmath evaluation.
        assert_relative_eq!(d_n1(3).unwrap(), 0.596_833_5, epsilon = 1e-7);
        assert_relative_eq!(d_n1(100).unwrap(), 2.366_254_8, epsilon = 1e-7);
        assert!(d_n1(1).is_err());
        assert!(d_n1(0).is_err());
    }

    #[test]
    fn d_n1_tail_product_trend() {
        // m PhiBar(d_n1(m)) tends to 1 slowly: 0.93957 at m = 1e6.
        let prod = |m: u64| m as f64 * phibar(d_n1(m).unwrap());
        assert_relative_eq!(prod(1_000_000), 0.939_57, epsilon = 1e-4);
        let seq: Vec<f64> = [1e4 as u64, 1e6 as u64, 1e9 as u64, 1e12 as u64].iter().map(|&m| prod(m)).collect();
        assert!(seq.windows(2).all(|w| w[0] < w[1] && w[1] < 1.0), "{seq:?}");
    }

    #[test]
    fn shifted_tail_trend() {
        let m = 1_000_000u64;
        let d = d_n1(m).unwrap();
        let frozen = [(-1.0, 0.958), (0.0, 0.940), (1.0, 0.883), (2.0, 0.795)];
        for (x, r) in frozen {
            let ratio = m as f64 * phibar(d + x / d) / (-x).exp();
            assert_relative_eq!(ratio, r, epsilon = 2e-3);
            let m2 = 1_000_000_000_000u64;
            let d2 = d_n1(m2).unwrap();
            let ratio2 = m2 as f64 * phibar(d2 + x / d2) / (-x).exp();
            assert!((ratio2 - 1.0).abs() < (ratio - 1.0).abs());
        }
    }

    #[test]
    fn d_n1_increasing_on_grid() {
        let mut prev = d_n1(8).unwrap();
        for m in (9..5000).chain((1..200).map(|k| 5000 + 997 * k)) {
            let d = d_n1(m).unwrap();
            assert!(d > prev, "m = {m}");
            prev = d;
        }
    }

    #[test]
    fn d_n_y_examples() {
        assert_eq!(d_n_y(10, 50, 0.0).unwrap(), d_n1(45).unwrap());
        let base = d_n1(4950).unwrap();
        let got = d_n_y(100, 10_000, 2.828427).unwrap();
        assert_relative_eq!(got, base + 2.828427 * 4950f64.ln() / 300.0, epsilon = 1e-12);
        let up = d_n_y(40, 200, 1.3).unwrap() - d_n1(780).unwrap();
        let down = d_n_y(40, 200, -1.3).unwrap() - d_n1(780).unwrap();
        assert_relative_eq!(up, -down, epsilon = 1e-12);
        assert!(d_n_y(2, 10, 0.0).is_err());
    }

    #[test]
    fn d_n2_values() {
        assert_eq!(d_n2(100).unwrap(), d_n1(100).unwrap());
        assert_relative_eq!(d_n2(100).unwrap(), 2.366_254_8, epsilon = 1e-7);
        // 2 d_n2(p) - 2 sqrt(2 log p) = -(log log p + log 4 pi) / sqrt(2 log p),
        // i.e. O(log log p / sqrt(log p)) with a ratio falling toward 1/sqrt 2.
        let ratio = |p: f64| {
            let diff = 2.0 * d_n2(p as u64).unwrap() - 2.0 * (2.0 * p.ln()).sqrt();
            let exact = -(p.ln().ln() + (4.0 * std::f64::consts::PI).ln()) / (2.0 * p.ln()).sqrt();
            assert_relative_eq!(diff, exact, max_relative = 1e-12);
            diff.abs() / (p.ln().ln() / p.ln().sqrt())
        };
        assert_relative_eq!(ratio(1e6), 1.389, epsilon = 1e-3);
        assert!(ratio(1e6) > ratio(1e12) && ratio(1e12) > ratio(1e18) && ratio(1e18) > 0.5f64.sqrt());
        assert!(d_n2(1).is_err());
    }

    #[test]
    fn interpoint_examples() {
        let nz = interpoint_with_d(100, 3.0, 2.0, DKind::DN1).unwrap();
        assert_relative_eq!(nz.b, 256.5685, epsilon = 1e-4);
        assert_relative_eq!(nz.c, 0.070_710_7, epsilon = 1e-7);

        let nz = interpoint_with_d(64, 1.0, 1.5, DKind::DN1).unwrap();
        assert_relative_eq!(nz.b, 128.0 + 16.0 * 1.5, epsilon = 1e-12);

        let g = MomentProfile::gaussian();
        let nz = interpoint_normalizers(100, 10, &g, &classify_regime(&g, 100, 10).unwrap()).unwrap();
        assert_relative_eq!(nz.b, 258.218_773_714, epsilon = 1e-8);
        assert_relative_eq!(nz.c, 0.072_773_467_1, epsilon = 1e-10);
        assert_eq!(nz.d_kind, DKind::DN1);

        let t = MomentProfile::threepoint5();
        let nz = interpoint_normalizers(100, 10, &t, &classify_regime(&t, 100, 10).unwrap()).unwrap();
        assert_eq!(nz.d_kind, DKind::DN1);
    }

    #[test]
    fn interpoint_needs_m6_for_skew_correction() {
        let p = MomentProfile::new(0.0, 3.0, None, TailClass::SubExp { r: 0.6, eta: 0.1 }).unwrap();
        let reg = classify_regime(&p, 100, 10).unwrap();
        assert!(matches!(interpoint_normalizers(100, 10, &p, &reg), Err(Error::Unavailable(_))));
    }

    #[test]
    fn rejects_nonpositive_d() {
        assert!(interpoint_with_d(10, 3.0, 0.0, DKind::DN1).is_err());
        assert!(interpoint_with_d(10, 3.0, -0.5, DKind::DN1).is_err());
        assert!(matches!(general_normalizers(10, 2, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(general_normalizers(10, 3, 0.0, 1.0).is_ok());
    }

    #[test]
    fn general_and_qnorm_examples() {
        let n = 400;
        let d = d_n1(pair_count(30)).unwrap();
        let nz = general_normalizers(n, 30, 0.0, 1.0).unwrap();
        assert_relative_eq!(nz.b, 20.0 * d, epsilon = 1e-12);
        assert_relative_eq!(nz.c, d / 20.0, epsilon = 1e-12);

        let g = MomentProfile::gaussian();
        let a = general_normalizers(n, 30, 2.0, 8.0).unwrap();
        let b = interpoint_normalizers(n, 30, &g, &classify_regime(&g, n, 30).unwrap()).unwrap();
        assert_relative_eq!(a.b, b.b, epsilon = 1e-12);
        assert_relative_eq!(a.c, b.c, epsilon = 1e-12);
        let q = qnorm_normalizers(n, 30, 2.0, 8.0).unwrap();
        assert_eq!(q, a);

        let one = general_normalizers(1, 30, 2.0, 8.0).unwrap();
        assert_relative_eq!(one.b, 2.0 + 8f64.sqrt() * d, epsilon = 1e-12);

        let q2 = qnorm_normalizers(n, 30, 2.0, 16.0).unwrap();
        assert_relative_eq!(q2.c, a.c / 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(q2.b - 2.0 * n as f64, (a.b - 2.0 * n as f64) * 2f64.sqrt(), epsilon = 1e-9);

        assert!(matches!(qnorm_normalizers(n, 30, 0.0, 1.0), Err(Error::Degenerate(_))));
        assert!(matches!(general_normalizers(n, 30, 1.0, 0.0), Err(Error::Degenerate(_))));
    }

    proptest! {
        #[test]
        fn normalizer_consistency(n in 1usize..100_000, p in 3usize..5000, mean in -10.0f64..10.0, var in 1e-3f64..100.0) {
            let nz = general_normalizers(n, p, mean, var).unwrap();
            let lhs = nz.c * (nz.b - n as f64 * mean);
            prop_assert!((lhs - nz.d * nz.d).abs() <= 1e-12 * nz.d * nz.d.max(1.0) * 8.0 + 1e-12 * (n as f64 * mean.abs()) * nz.c);
        }

        #[test]
        fn interpoint_consistency(n in 1usize..100_000, p in 3usize..5000, m4 in 1.0f64..5.0) {
            let d = d_n1(pair_count(p)).unwrap();
            let nz = interpoint_with_d(n, m4, d, DKind::DN1).unwrap();
            let lhs = nz.c * (nz.b - 2.0 * n as f64);
            prop_assert!((lhs - d * d).abs() <= 1e-10 * d * d);
        }
    }
}
