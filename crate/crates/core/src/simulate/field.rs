//! The equicorrelated Gaussian pair field `Y_ij = sqrt(1 - 2 rho) N_ij +
//! sqrt(rho) (xi_i + xi_j)`, whose covariance is 1 on the diagonal, `rho` for
//! pairs sharing one index and 0 for disjoint pairs.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};
use crate::gauss::std_normal_tail;
use crate::pair_count;
use crate::pairstats::{pair_at, Pair, PairField, PairKind};

use super::rng::rep_rng;

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&rho) {
        return Err(domain(format!("rho = {rho} outside [0, 1/2]")));
    }
    Ok(())
}

fn draw_xi<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<f64> {
    (0..p).map(|_| StandardNormal.sample(rng)).collect()
}

/// Materialized field in lexicographic pair order.
pub fn equicorr_pair_field(p: usize, rho: f64, seed: u64) -> Result<PairField> {
    equicorr_pair_field_with(p, rho, &mut rep_rng(seed, 0))
}

pub fn equicorr_pair_field_with<R: Rng + ?Sized>(p: usize, rho: f64, rng: &mut R) -> Result<PairField> {
    check_rho(rho)?;
    let mut values = Vec::with_capacity(pair_count(p) as usize);
    for_each_field_value(p, rho, rng, |v| values.push(v));
    PairField::new(p, values, PairKind::Walk)
}

/// Maximum of the field, generated in the same order as
/// [`equicorr_pair_field_with`] without storing it.
pub fn field_max<R: Rng + ?Sized>(p: usize, rho: f64, rng: &mut R) -> Result<f64> {
    check_rho(rho)?;
    if p < 2 {
        return Err(crate::error::size(format!("p = {p} < 2")));
    }
    let mut m = f64::NEG_INFINITY;
    for_each_field_value(p, rho, rng, |v| m = m.max(v));
    Ok(m)
}

fn for_each_field_value<R: Rng + ?Sized>(p: usize, rho: f64, rng: &mut R, mut emit: impl FnMut(f64)) {
    let xi = draw_xi(p, rng);
    let (a, s) = (rho.sqrt(), (1.0 - 2.0 * rho).sqrt());
    for i in 0..p {
        for j in i + 1..p {
            let own: f64 = if s > 0.0 { StandardNormal.sample(rng) } else { 0.0 };
            emit(s * own + a * (xi[i] + xi[j]));
        }
    }
}

/// Number of pairs with `Y_ij > u`, sampled exactly without materializing the
/// field.
///
/// Given `xi`, the indicators are independent Bernoulli with
/// `q_ij = PhiBar((u - sqrt(rho)(xi_i + xi_j)) / sqrt(1 - 2 rho))`. With `xi`
/// sorted decreasingly, `q` decreases along each row and across rows, so the
/// walk draws geometric gaps at a running upper bound and thins each
/// candidate. At `rho = 1/2` the count is deterministic given `xi`.
pub fn count_field_exceedances<R: Rng + ?Sized>(p: usize, rho: f64, u: f64, rng: &mut R) -> Result<u64> {
    check_rho(rho)?;
    if p < 2 {
        return Err(crate::error::size(format!("p = {p} < 2")));
    }
    let mut xi = draw_xi(p, rng);
    xi.sort_unstable_by(|x, y| y.total_cmp(x));
    let a = rho.sqrt();
    let s = (1.0 - 2.0 * rho).sqrt();
    if s == 0.0 {
        // Pairs with xi_i + xi_j > u / a, counted with two pointers.
        let t = u / a;
        let mut count = 0u64;
        let mut hi = p;
        for i in 0..p {
            while hi > i + 1 && xi[i] + xi[hi - 1] <= t {
                hi -= 1;
            }
            if hi <= i + 1 {
                break;
            }
            count += (hi - i - 1) as u64;
        }
        return Ok(count);
    }
    let q = |pair: Pair| std_normal_tail((u - a * (xi[pair.i] + xi[pair.j])) / s);
    let total = pair_count(p);
    let mut k = 0u64;
    let mut count = 0u64;
    while k < total {
        let here = pair_at(p, k as usize);
        let mut bound = q(here);
        if here.i + 2 < p {
            bound = bound.max(q(Pair { i: here.i + 1, j: here.i + 2 }));
        }
        if bound <= 0.0 {
            break;
        }
        let gap = if bound >= 1.0 {
            0
        } else {
            let v: f64 = 1.0 - rng.gen::<f64>();
            let g = (v.ln() / (-bound).ln_1p()).floor();
            if g >= (total - k) as f64 {
                break;
            }
            g as u64
        };
        k += gap;
        let cand = pair_at(p, k as usize);
        if rng.gen::<f64>() * bound < q(cand) {
            count += 1;
        }
        k += 1;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::field_exceedance_moments;
    use crate::pairstats::extremes;

    #[test]
    fn construction_edge_cases() {
        let f = equicorr_pair_field(6, 0.5, 3).unwrap();
        let mut rng = rep_rng(3, 0);
        let xi = draw_xi(6, &mut rng);
        for (pair, v) in f.iter() {
            assert!((v - (xi[pair.i] + xi[pair.j]) / 2f64.sqrt()).abs() < 1e-12);
        }
        assert!(equicorr_pair_field(5, 0.51, 0).is_err());
        let mut r1 = rep_rng(9, 2);
        let mut r2 = rep_rng(9, 2);
        let m = field_max(30, 0.3, &mut r1).unwrap();
        assert_eq!(m, extremes(&equicorr_pair_field_with(30, 0.3, &mut r2).unwrap()).max_value);
    }

    #[test]
    fn field_covariance_structure() {
        let reps = 100_000u64;
        let p = 5;
        for rho in [0.0, 0.2, 1.0 / 3.0, 0.45, 0.5] {
            let (mut s11, mut s12, mut s13, mut s_dis) = (0.0, 0.0, 0.0, 0.0);
            let (a, b, c, d) = (Pair { i: 0, j: 1 }, Pair { i: 1, j: 2 }, Pair { i: 0, j: 2 }, Pair { i: 2, j: 3 });
            for r in 0..reps {
                let f = equicorr_pair_field_with(p, rho, &mut rep_rng(11, r)).unwrap();
                let (ya, yb, yc, yd) = (f.get(a), f.get(b), f.get(c), f.get(d));
                s11 += ya * ya;
                s12 += ya * yb;
                s13 += ya * yc;
                s_dis += ya * yd;
            }
            let n = reps as f64;
            let se_var = (2.0 / n).sqrt();
            let se_cov = ((1.0 + rho * rho) / n).sqrt();
            assert!((s11 / n - 1.0).abs() < 3.0 * se_var, "rho={rho} var");
            assert!((s12 / n - rho).abs() < 3.0 * se_cov, "rho={rho} shared (0,1)-(1,2)");
            assert!((s13 / n - rho).abs() < 3.0 * se_cov, "rho={rho} shared (0,1)-(0,2)");
            assert!((s_dis / n).abs() < 3.0 * (1.0 / n).sqrt(), "rho={rho} disjoint");
        }
    }

    fn sparse_vs_exact(p: usize, rho: f64, u: f64, reps: u64) {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for r in 0..reps {
            let v = count_field_exceedances(p, rho, u, &mut rep_rng(5, r)).unwrap() as f64;
            s1 += v;
            s2 += v * v;
        }
        let n = reps as f64;
        let (m1, m2) = field_exceedance_moments(p, rho, u).unwrap();
        let var = m2 - m1 * m1;
        assert!((s1 / n - m1).abs() < 4.0 * (var / n).sqrt(), "p={p} rho={rho}: mean {} vs {m1}", s1 / n);
        let m4_bound = (s2 / n).max(m2) * 10.0;
        assert!(
            (s2 / n - m2).abs() < 4.0 * (m4_bound / n).sqrt() + 0.05 * m2,
            "p={p} rho={rho}: second {} vs {m2}",
            s2 / n
        );
    }

    #[test]
    fn sparse_sampler_matches_exact_moments() {
        sparse_vs_exact(40, 0.0, 2.0, 4000);
        sparse_vs_exact(40, 0.2, 2.5, 4000);
        sparse_vs_exact(60, 0.45, 3.0, 4000);
        sparse_vs_exact(200, 1.0 / 3.0, 3.5, 2000);
    }

    #[test]
    fn sparse_sampler_matches_materialized_field() {
        let (p, rho, u, reps) = (30usize, 0.3, 2.2, 6000u64);
        let mut dense = vec![0u64; 64];
        let mut sparse = vec![0u64; 64];
        for r in 0..reps {
            let f = equicorr_pair_field_with(p, rho, &mut rep_rng(1, r)).unwrap();
            let c = f.values.iter().filter(|&&v| v > u).count().min(63);
            dense[c] += 1;
            let c = count_field_exceedances(p, rho, u, &mut rep_rng(2, r)).unwrap().min(63) as usize;
            sparse[c] += 1;
        }
        // Two-sample KS on the count distributions.
        let (mut fa, mut fb, mut ks) = (0.0, 0.0, 0.0f64);
        for k in 0..64 {
            fa += dense[k] as f64 / reps as f64;
            fb += sparse[k] as f64 / reps as f64;
            ks = ks.max((fa - fb).abs());
        }
        assert!(ks < 1.63 * (2.0 / reps as f64).sqrt(), "ks = {ks}");
    }

    #[test]
    fn half_rho_two_pointer_count() {
        for r in 0..50 {
            let p = 25;
            let u = 1.0;
            let c = count_field_exceedances(p, 0.5, u, &mut rep_rng(3, r)).unwrap();
            let f = equicorr_pair_field_with(p, 0.5, &mut rep_rng(3, r)).unwrap();
            let direct = f.values.iter().filter(|&&v| v > u).count() as u64;
            assert_eq!(c, direct);
        }
    }
}
