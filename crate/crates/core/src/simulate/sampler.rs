use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::moments::{MomentProfile, TailClass};
use crate::pairstats::SampleMatrix;

use super::rng::rep_rng;

/// Entry law, always standardized to mean 0 and variance 1.
#[derive(Debug, Clone, PartialEq)]
pub enum EntryDistribution {
    Rademacher,
    Gaussian,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    UniformSqrt3,
    /// `+-sqrt 5` with probability 1/10 each, 0 otherwise.
    ThreePoint5,
    /// Finite discrete law with the given support and probabilities.
    Custom {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
}

impl EntryDistribution {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "rademacher" => Ok(Self::Rademacher),
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::UniformSqrt3),
            "threepoint5" => Ok(Self::ThreePoint5),
            other => Err(Error::Config(format!("unknown distribution '{other}'"))),
        }
    }

    /// Discrete law; must be centred with unit variance.
    pub fn custom(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::Config("custom law needs matching nonempty values and probabilities".into()));
        }
        if probs.iter().any(|&q| !(q >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("custom probabilities must be nonnegative and sum to 1".into()));
        }
        let d = Self::Custom { values, probs };
        let (m1, m2) = (d.raw_moment(1), d.raw_moment(2));
        if m1.abs() > 1e-9 || (m2 - 1.0).abs() > 1e-9 {
            return Err(domain(format!("custom law has mean {m1} and variance {m2}; need 0 and 1")));
        }
        Ok(d)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Rademacher => "rademacher",
            Self::Gaussian => "gaussian",
            Self::UniformSqrt3 => "uniform",
            Self::ThreePoint5 => "threepoint5",
            Self::Custom { .. } => "custom",
        }
    }

    fn raw_moment(&self, k: i32) -> f64 {
        match self {
            Self::Custom { values, probs } => values.iter().zip(probs).map(|(v, q)| q * v.powi(k)).sum(),
            _ => unreachable!("raw_moment is only used for custom laws"),
        }
    }

    pub fn profile(&self) -> MomentProfile {
        match self {
            Self::Rademacher => MomentProfile::rademacher(),
            Self::Gaussian => MomentProfile::gaussian(),
            Self::UniformSqrt3 => MomentProfile::uniform(),
            Self::ThreePoint5 => MomentProfile::threepoint5(),
            Self::Custom { values, .. } => {
                let k = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                MomentProfile {
                    m2: 1.0,
                    m3: self.raw_moment(3),
                    m4: self.raw_moment(4),
                    m6: Some(self.raw_moment(6)),
                    class: TailClass::Bounded { k: k + 1e-9 },
                }
            }
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::Gaussian => StandardNormal.sample(rng),
            Self::UniformSqrt3 => 3f64.sqrt() * (2.0 * rng.gen::<f64>() - 1.0),
            Self::ThreePoint5 => {
                let u: f64 = rng.gen();
                if u < 0.1 {
                    -(5f64.sqrt())
                } else if u < 0.2 {
                    5f64.sqrt()
                } else {
                    0.0
                }
            }
            Self::Custom { values, probs } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (v, q) in values.iter().zip(probs) {
                    acc += q;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().unwrap()
            }
        }
    }

    /// `(E f, Var f)` of the walk summand `f(X, X')` for independent copies.
    pub fn walk_moments(&self, kind: &crate::pairstats::WalkKind) -> Result<(f64, f64)> {
        use crate::pairstats::WalkKind;
        let prof = self.profile();
        match kind {
            WalkKind::SqDiff => Ok((2.0, 2.0 * (prof.m4 + 1.0))),
            WalkKind::Product => Ok((0.0, 1.0)),
            WalkKind::AbsQ(q) => {
                let m1 = self.abs_diff_moment(*q)?;
                let m2 = self.abs_diff_moment(2.0 * q)?;
                Ok((m1, m2 - m1 * m1))
            }
            WalkKind::Custom(_) => Err(Error::Config("custom walk summands need explicit mean and variance".into())),
        }
    }

    /// `E|X - X'|^q`.
    pub fn abs_diff_moment(&self, q: f64) -> Result<f64> {
        let disc = |values: &[f64], probs: &[f64]| {
            let mut acc = 0.0;
            for (a, pa) in values.iter().zip(probs) {
                for (b, pb) in values.iter().zip(probs) {
                    acc += pa * pb * (a - b).abs().powf(q);
                }
            }
            acc
        };
        Ok(match self {
            Self::Rademacher => disc(&[-1.0, 1.0], &[0.5, 0.5]),
            Self::ThreePoint5 => disc(&[-(5f64.sqrt()), 0.0, 5f64.sqrt()], &[0.1, 0.8, 0.1]),
            Self::Custom { values, probs } => disc(values, probs),
            Self::Gaussian => {
                // X - X' ~ N(0, 2).
                2f64.powf(q) * libm::tgamma((q + 1.0) / 2.0) / std::f64::consts::PI.sqrt()
            }
            Self::UniformSqrt3 => {
                // Triangular density (a - |t|)/a^2 on [-a, a], a = 2 sqrt 3.
                let a = 2.0 * 3f64.sqrt();
                2.0 * a.powf(q) / ((q + 1.0) * (q + 2.0))
            }
        })
    }
}

/// `p x n` matrix of iid entries.
pub fn sample_matrix(dist: &EntryDistribution, p: usize, n: usize, seed: u64) -> Result<SampleMatrix> {
    let mut rng = rep_rng(seed, 0);
    sample_matrix_with(dist, p, n, &mut rng)
}

pub fn sample_matrix_with<R: Rng + ?Sized>(
    dist: &EntryDistribution,
    p: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    let data = (0..p * n).map(|_| dist.sample(rng)).collect();
    SampleMatrix::new(p, n, data)
}

/// `n x p` sample with rows `sqrt(rho) xi_k + sqrt(1 - rho) xi_ki`, i.e.
/// `N_p(0, (1 - rho) I + rho 1 1^T)` observations.
pub fn equicorr_normal_sample(n: usize, p: usize, rho: f64, seed: u64) -> Result<SampleMatrix> {
    equicorr_normal_sample_with(n, p, rho, &mut rep_rng(seed, 0))
}

pub fn equicorr_normal_sample_with<R: Rng + ?Sized>(n: usize, p: usize, rho: f64, rng: &mut R) -> Result<SampleMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(domain(format!("rho = {rho} outside [0, 1)")));
    }
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let common: f64 = StandardNormal.sample(rng);
        for _ in 0..p {
            let own: f64 = StandardNormal.sample(rng);
            data.push(a * common + b * own);
        }
    }
    SampleMatrix::new(n, p, data)
}
