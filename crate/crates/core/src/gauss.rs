//! Normal and Gumbel distribution functions, Gaussian tail asymptotics and
//! oracles for the pair-indexed Gaussian field.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::pair_count;
use crate::quad::integrate;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn std_normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Acklam's rational approximation for the lower quantile.
fn acklam(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if u < 0.02425 {
        tail((-2.0 * u.ln()).sqrt())
    } else if u > 1.0 - 0.02425 {
        -tail((-2.0 * (1.0 - u).ln()).sqrt())
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `x` with `Phi(x) = u`.
pub fn std_normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("quantile level {u} outside (0, 1)")));
    }
    if u > 0.5 {
        return Ok(-lower_quantile(1.0 - u));
    }
    Ok(lower_quantile(u))
}

/// Lower quantile for `u <= 1/2`, Halley-refined against `erfc`.
fn lower_quantile(u: f64) -> f64 {
    let mut x = acklam(u);
    for _ in 0..2 {
        let e = std_normal_cdf(x) - u;
        let t = e * SQRT_2PI * (0.5 * x * x).exp();
        x -= t / (1.0 + 0.5 * x * t);
    }
    x
}

/// `x` with `PhiBar(x) = a`, accurate for tiny `a`.
pub fn std_normal_tail_quantile(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(domain(format!("tail level {a} outside (0, 1)")));
    }
    if a >= 0.5 {
        return std_normal_quantile(1.0 - a);
    }
    Ok(-lower_quantile(a))
}

/// `exp(-exp(-x))`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Upper `alpha` quantile `-log(log(1/(1 - alpha)))`.
pub fn gumbel_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    Ok(-(-(-alpha).ln_1p()).ln())
}

/// `x` with `Lambda(x) = u`.
pub fn gumbel_inverse_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("level {u} outside (0, 1)")));
    }
    Ok(-(-u.ln()).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailAsymptote {
    pub value: f64,
    pub coefficient: f64,
    pub exponent_arg: f64,
}

/// Sum of the entries of the inverse of `rho 1 1^T + (1 - rho) I` of size `d`.
pub fn equicorr_inverse_sum(d: usize, rho: f64) -> f64 {
    let d = d as f64;
    d / (1.0 + (d - 1.0) * rho)
}

/// Asymptote of `P(min_{k<=d} N_k > t)` for an equicorrelated standard
/// Gaussian vector as `t -> inf`.
pub fn equicorr_min_tail_asymptote(d: usize, rho: f64, t: f64) -> Result<TailAsymptote> {
    if d < 2 {
        return Err(crate::error::size(format!("d = {d} < 2")));
    }
    let df = d as f64;
    if !(rho > -1.0 / (df - 1.0) && rho < 1.0) {
        return Err(domain(format!("rho = {rho} gives a singular covariance for d = {d}")));
    }
    if !(t > 0.0) {
        return Err(domain(format!("t = {t} must be positive")));
    }
    let s = 1.0 + (df - 1.0) * rho;
    let det = (1.0 - rho).powf(df - 1.0) * s;
    let coefficient = (2.0 * PI).powf(-df / 2.0) / det.sqrt() * (s / t).powf(df);
    let exponent_arg = -0.5 * t * t * equicorr_inverse_sum(d, rho);
    Ok(TailAsymptote { value: coefficient * exponent_arg.exp(), coefficient, exponent_arg })
}

/// `P(N_1 > t, N_2 > t)` for a standard bivariate normal with correlation
/// `rho`, by adaptive quadrature of `int_t^inf phi(u) PhiBar((t - rho u)/sqrt(1 - rho^2)) du`.
///
/// The integral is truncated at `max(t + 12, 10)`; the dropped mass is at
/// most `PhiBar(10) < 1e-23`.
pub fn bivariate_orthant_prob(rho: f64, t: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(domain(format!("|rho| = {} must be < 1", rho.abs())));
    }
    if !t.is_finite() {
        return Err(domain("t must be finite"));
    }
    let s = (1.0 - rho * rho).sqrt();
    let f = |u: f64| std_normal_pdf(u) * std_normal_tail((t - rho * u) / s);
    let upper = (t + 12.0).max(10.0);
    // Split at the integrand's bulk so the adaptive rule sees the features.
    let mut knots = vec![t];
    for k in [-4.0, -2.0, 0.0, 2.0, 4.0] {
        if k > t && k < upper {
            knots.push(k);
        }
    }
    knots.push(upper);
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += integrate(&f, w[0], w[1], 1e-15).0;
    }
    Ok(total)
}

/// Cramer-type ratio correction `exp(x^3 skew / (6 sqrt n))`.
pub fn ld_correction_factor(x: f64, n: usize, skew: f64) -> f64 {
    (x.powi(3) * skew / (6.0 * (n as f64).sqrt())).exp()
}

/// Order-of-magnitude diagnostics for the Gumbel approximation error of the
/// maximum of a pair field, without the unknown constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateTerms {
    /// `(log p)^{-rho/(1+rho)} p^{-(1-3 rho)/(1+rho)}`
    pub dependence: f64,
    /// `sqrt((log p)^3 / n)`
    pub gaussian_comparison: f64,
    /// `(log log p)^2 / log p`
    pub normal_tail: f64,
}

pub fn rate_bound_terms(p: usize, n: usize, rho: f64) -> Result<RateTerms> {
    if p < 3 {
        return Err(crate::error::size(format!("p = {p} < 3")));
    }
    let lp = (p as f64).ln();
    rate_terms_at_log(lp, n, rho)
}

/// [`rate_bound_terms`] parametrised by `log p`, for dimensions beyond `usize`.
pub fn rate_terms_at_log(lp: f64, n: usize, rho: f64) -> Result<RateTerms> {
    if !(0.0..=0.5).contains(&rho) {
        return Err(domain(format!("rho = {rho} outside [0, 1/2]")));
    }
    Ok(RateTerms {
        dependence: lp.powf(-rho / (1.0 + rho)) * (-(1.0 - 3.0 * rho) / (1.0 + rho) * lp).exp(),
        gaussian_comparison: (lp.powi(3) / n as f64).sqrt(),
        normal_tail: lp.ln().powi(2) / lp,
    })
}

/// Limiting mean and second moment of the exceedance count of the pair field
/// over `d + x/d`. Above `rho = 1/3` the second moment diverges at the
/// returned rate.
pub fn v_moment_asymptotes(p: usize, rho: f64, x: f64) -> Result<(f64, f64)> {
    if p < 3 {
        return Err(crate::error::size(format!("p = {p} < 3")));
    }
    v_moment_asymptotes_at_log((p as f64).ln(), rho, x)
}

pub fn v_moment_asymptotes_at_log(lp: f64, rho: f64, x: f64) -> Result<(f64, f64)> {
    if !(0.0..=0.5).contains(&rho) {
        return Err(domain(format!("rho = {rho} outside [0, 1/2]")));
    }
    let mean = (-x).exp();
    let second = if rho <= 1.0 / 3.0 {
        mean + mean * mean
    } else {
        v_growth_coefficient(rho) * lp.powf(-rho / (1.0 + rho)) * ((3.0 * rho - 1.0) / (1.0 + rho) * lp).exp()
    };
    Ok((mean, second))
}

/// `(1 + rho)^{3/2} / (8 pi (1 - rho)^{1/2})`.
pub fn v_growth_coefficient(rho: f64) -> f64 {
    (1.0 + rho).powf(1.5) / (8.0 * PI * (1.0 - rho).sqrt())
}

/// Exact first two moments of the number of pairs whose field value exceeds
/// `u`, for the Gaussian pair field with one-index correlation `rho`.
pub fn field_exceedance_moments(p: usize, rho: f64, u: f64) -> Result<(f64, f64)> {
    if p < 3 {
        return Err(crate::error::size(format!("p = {p} < 3")));
    }
    let m = pair_count(p) as f64;
    let pf = p as f64;
    let tail = std_normal_tail(u);
    let mean = m * tail;
    let second =
        mean + m * (pf - 2.0) * (pf - 3.0) / 2.0 * tail * tail + m * (2.0 * pf - 4.0) * bivariate_orthant_prob(rho, u)?;
    Ok((mean, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Composite Simpson oracle for the orthant probability over the joint
    /// density on a square, independent of the one-dimensional reduction.
    fn orthant_2d(rho: f64, t: f64) -> f64 {
        let hi = t.max(0.0) + 9.0;
        let k = 800;
        let h = (hi - t) / k as f64;
        let s = (1.0 - rho * rho).sqrt();
        let dens = |a: f64, b: f64| (-(a * a - 2.0 * rho * a * b + b * b) / (2.0 * s * s)).exp() / (2.0 * PI * s);
        let w = |i: usize| {
            if i == 0 || i == k {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let mut acc = 0.0;
        for i in 0..=k {
            for j in 0..=k {
                acc += w(i) * w(j) * dens(t + i as f64 * h, t + j as f64 * h);
            }
        }
        acc * h * h / 9.0
    }

    #[test]
    fn normal_functions() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert_relative_eq!(std_normal_tail(1.959_964), 0.025, epsilon = 1e-7);
        assert_relative_eq!(std_normal_tail(8.5), 9.479_534_822_203_3e-18, max_relative = 1e-12);
        for k in -600..=600 {
            let x = k as f64 / 100.0;
            // For x > 0 the level u = Phi(x) itself carries an absolute
            // rounding error of about eps, which moves x by eps / phi(x).
            let tol = 1e-10 + if x > 0.0 { 2.0 * f64::EPSILON / std_normal_pdf(x) } else { 0.0 };
            assert!((std_normal_quantile(std_normal_cdf(x)).unwrap() - x).abs() < tol, "x = {x}");
            let tol_tail = 1e-10 + if x < 0.0 { 2.0 * f64::EPSILON / std_normal_pdf(x) } else { 0.0 };
            assert!((std_normal_tail_quantile(std_normal_tail(x)).unwrap() - x).abs() < tol_tail, "x = {x}");
            assert_relative_eq!(std_normal_cdf(x) + std_normal_tail(x), 1.0, epsilon = 1e-15);
        }
        assert!(std_normal_quantile(0.0).is_err() && std_normal_quantile(1.0).is_err());
        assert_relative_eq!(std_normal_tail_quantile(1e-20).unwrap(), 9.262_340_089_798_408, epsilon = 1e-10);
    }

    #[test]
    fn gumbel_functions() {
        assert_relative_eq!(gumbel_cdf(0.0), (-1f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(gumbel_quantile(0.05).unwrap(), 2.970_195, epsilon = 1e-6);
        assert!(gumbel_quantile(1.0 - (-1f64).exp()).unwrap().abs() < 1e-12);
        assert!(gumbel_quantile(0.0).is_err() && gumbel_quantile(1.0).is_err());
        for k in -300..=500 {
            let x = k as f64 / 100.0;
            assert!((gumbel_inverse_cdf(gumbel_cdf(x)).unwrap() - x).abs() < 1e-10, "x = {x}");
        }
        for alpha in [0.001, 0.05, 0.5, 0.9] {
            assert_relative_eq!(
                gumbel_quantile(alpha).unwrap(),
                gumbel_inverse_cdf(1.0 - alpha).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn asymptote_examples() {
        let t = 2.3;
        let a = equicorr_min_tail_asymptote(2, 0.0, t).unwrap();
        assert_relative_eq!(a.value, (-t * t).exp() / (2.0 * PI * t * t), max_relative = 1e-12);
        let mills = std_normal_pdf(t) / t;
        assert_relative_eq!(a.value, mills * mills, max_relative = 1e-12);

        let a = equicorr_min_tail_asymptote(2, 0.25, 3.0).unwrap();
        assert_relative_eq!(a.coefficient, 0.028_537_242_8, epsilon = 1e-10);
        assert_relative_eq!(a.exponent_arg, -7.2, epsilon = 1e-12);
        assert_relative_eq!(a.value, 2.1306e-5, max_relative = 1e-4);
        assert_relative_eq!(a.value, a.coefficient * a.exponent_arg.exp(), max_relative = 1e-12);

        assert_relative_eq!(equicorr_inverse_sum(2, 0.5), 4.0 / 3.0, epsilon = 1e-15);
        assert!(equicorr_min_tail_asymptote(3, -0.5, 1.0).is_err());
        assert!(equicorr_min_tail_asymptote(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn orthant_exact_values() {
        assert!((bivariate_orthant_prob(0.0, 0.0).unwrap() - 0.25).abs() < 1e-12);
        assert!((bivariate_orthant_prob(0.5, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        for rho in [-0.9, -0.3, 0.2, 0.7, 0.95] {
            let exact = 0.25 + f64::asin(rho) / (2.0 * PI);
            assert!((bivariate_orthant_prob(rho, 0.0).unwrap() - exact).abs() < 1e-10, "rho = {rho}");
        }
        for t in [-3.0, -0.5, 0.7, 2.0, 5.0, 8.0] {
            let q = std_normal_tail(t);
            assert!((bivariate_orthant_prob(0.0, t).unwrap() - q * q).abs() < 1e-10);
        }
        assert!(bivariate_orthant_prob(1.0, 0.0).is_err());
    }

    #[test]
    fn orthant_matches_2d_oracle() {
        for (rho, t) in [(0.25, 1.0), (0.45, 2.5), (-0.4, 0.5), (0.33, 3.0)] {
            let a = bivariate_orthant_prob(rho, t).unwrap();
            let b = orthant_2d(rho, t);
            assert!((a - b).abs() < 1e-10, "rho={rho} t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn orthant_over_asymptote_at_five() {
        for rho in [0.0, 0.25, 1.0 / 3.0] {
            let r = bivariate_orthant_prob(rho, 5.0).unwrap() / equicorr_min_tail_asymptote(2, rho, 5.0).unwrap().value;
            assert!((0.85..=1.15).contains(&r), "rho = {rho}: {r}");
            let r8 =
                bivariate_orthant_prob(rho, 8.0).unwrap() / equicorr_min_tail_asymptote(2, rho, 8.0).unwrap().value;
            assert!((r8 - 1.0).abs() < (r - 1.0).abs());
        }
    }

    #[test]
    fn slepian_monotone() {
        for t in [0.0, 0.5, 1.5, 3.0, 4.5] {
            let mut prev = 0.0;
            for k in -18..=18 {
                let v = bivariate_orthant_prob(k as f64 * 0.05, t).unwrap();
                assert!(v >= prev - 1e-15, "t={t} k={k}");
                prev = v;
            }
        }
    }

    #[test]
    fn ld_factor() {
        assert_eq!(ld_correction_factor(3.0, 10, 0.0), 1.0);
        assert_relative_eq!(ld_correction_factor(2.0, 100, 2.828_427), 1.458_084_517_5, epsilon = 1e-9);
        assert!(ld_correction_factor(1.0, 50, 0.4) < ld_correction_factor(1.5, 50, 0.4));
    }

    #[test]
    fn rate_terms() {
        let lp = 9.0f64;
        let r = rate_terms_at_log(lp, 100, 1.0 / 3.0).unwrap();
        assert_relative_eq!(r.dependence, lp.powf(-0.25), max_relative = 1e-12);
        let r = rate_terms_at_log(10.0, 1_000_000, 0.2).unwrap();
        assert_relative_eq!(r.gaussian_comparison, 0.031_623, epsilon = 1e-6);
        let r = rate_bound_terms(1000, 10, 0.0).unwrap();
        assert_relative_eq!(r.dependence, 1e-3, max_relative = 1e-12);
        assert!(rate_bound_terms(2, 10, 0.0).is_err());
    }

    #[test]
    fn v_moments() {
        assert_eq!(v_moment_asymptotes(100, 0.2, 0.0).unwrap(), (1.0, 2.0));
        let (_, s) = v_moment_asymptotes_at_log(27.0, 0.5, 0.0).unwrap();
        assert_relative_eq!(v_growth_coefficient(0.5), 0.103_374_167_9, epsilon = 1e-10);
        assert_relative_eq!(s, 0.103_374_167_9 / 3.0 * 9f64.exp(), max_relative = 1e-9);
        assert_relative_eq!(s, 279.2, epsilon = 0.1);
        let at = |lp: f64| v_growth_coefficient(1.0 / 3.0) * lp.powf(-0.25);
        let r = rate_terms_at_log(50.0, 1, 1.0 / 3.0).unwrap();
        assert_relative_eq!(at(50.0), v_growth_coefficient(1.0 / 3.0) * r.dependence, max_relative = 1e-12);
        assert!(at(1e4) < at(10.0));
        assert!(v_moment_asymptotes(10, 0.6, 0.0).is_err());
    }

    /// Brute-force E[V], E[V^2] by summing over all pairs of pairs.
    #[test]
    fn field_moments_match_enumeration() {
        let (p, rho, u) = (7usize, 0.3, 1.2);
        let pairs = crate::moments::pair_list(p);
        let q = std_normal_tail(u);
        let o = bivariate_orthant_prob(rho, u).unwrap();
        let mut second = 0.0;
        for a in &pairs {
            for b in &pairs {
                let shared = [a.0 == b.0, a.0 == b.1, a.1 == b.0, a.1 == b.1].iter().filter(|&&s| s).count();
                second += match shared {
                    2 => q,
                    1 => o,
                    _ => q * q,
                };
            }
        }
        let (m1, m2) = field_exceedance_moments(p, rho, u).unwrap();
        assert_relative_eq!(m1, 21.0 * q, max_relative = 1e-14);
        assert_relative_eq!(m2, second, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn asymptote_identity(d in 2usize..12, rho in 0.0f64..0.9, t in 0.5f64..8.0) {
            let a = equicorr_min_tail_asymptote(d, rho, t).unwrap();
            prop_assert!((a.value - a.coefficient * a.exponent_arg.exp()).abs() <= 1e-12 * a.value);
        }

        #[test]
        fn orthant_bounded_by_marginal(rho in -0.99f64..0.99, t in -4.0f64..6.0) {
            let v = bivariate_orthant_prob(rho, t).unwrap();
            prop_assert!(v >= -1e-15 && v <= std_normal_tail(t) + 1e-12);
        }
    }
}
