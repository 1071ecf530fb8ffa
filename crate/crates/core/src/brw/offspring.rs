use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};

/// Offspring law with `mu(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OffspringDist {
    support: Vec<u64>,
    probabilities: Vec<f64>,
    mean: f64,
}

impl OffspringDist {
    pub fn new(support: Vec<u64>, probabilities: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probabilities.len() {
            return Err(Error::config("offspring support and probabilities must be non-empty and of equal length"));
        }
        if support.iter().any(|&k| k == 0) {
            return Err(Error::Domain("offspring law must have mu(0) = 0".into()));
        }
        if !support.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::config("offspring support must be strictly increasing"));
        }
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::config("offspring probabilities must lie in [0, 1]"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!("offspring probabilities sum to {total}, not 1")));
        }
        let mean = support.iter().zip(&probabilities).map(|(&k, p)| k as f64 * p).sum();
        Ok(OffspringDist {
            support,
            probabilities,
            mean,
        })
    }

    /// Every particle has exactly `k` children.
    pub fn constant(k: u64) -> Result<Self> {
        Self::new(vec![k], vec![1.0])
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn max_offspring(&self) -> u64 {
        *self.support.last().expect("non-empty support")
    }

    /// Total number of children of `parents` independent particles.
    pub fn sample_total<R: Rng + ?Sized>(&self, parents: u64, rng: &mut R) -> u64 {
        match self.support.as_slice() {
            [k] => parents * k,
            [lo, hi] if hi - lo == 1 => parents * lo + binomial(parents, self.probabilities[1], rng),
            _ => {
                let counts = multinomial(parents, &self.probabilities, rng);
                counts.iter().zip(&self.support).map(|(c, k)| c * k).sum()
            }
        }
    }
}

impl std::fmt::Display for OffspringDist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.support.iter().zip(&self.probabilities).map(|(k, p)| format!("{k}:{p}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The two-point law on `{floor(1/rho), floor(1/rho) + 1}` with mean `1/rho`.
pub fn critical_offspring(rho: f64) -> Result<OffspringDist> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!(
            "critical offspring law needs rho in (0, 1), got {rho}"
        )));
    }
    let m = 1.0 / rho;
    let lo = m.floor();
    let high = m - lo;
    let lo = lo as u64;
    OffspringDist::new(vec![lo, lo + 1], vec![1.0 - high, high]).map(|mut d| {
        d.mean = m;
        d
    })
}

pub(crate) fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("valid binomial").sample(rng)
    }
}

/// Multinomial draw by sequential conditional binomials.
pub(crate) fn multinomial<R: Rng + ?Sized>(n: u64, probabilities: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0; probabilities.len()];
    let mut left = n;
    let mut mass = 1.0f64;
    for (i, &p) in probabilities.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probabilities.len() || p >= mass {
            out[i] = left;
            break;
        }
        let draw = binomial(left, (p / mass).clamp(0.0, 1.0), rng);
        out[i] = draw;
        left -= draw;
        mass -= p;
    }
    out
}
