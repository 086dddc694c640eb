//! Arrival-count pmfs and the readiness probability.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::state_space::binomial_coefficient;

/// Tolerance on the total mass of a tabulated pmf.
const TABLE_MASS_TOLERANCE: f64 = 1e-9;

/// Poisson pmf `mean^k e^-mean / k!`.
pub fn poisson_pmf(mean: f64, k: i64) -> Result<f64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(domain(format!("poisson mean must be finite and >= 0, got {mean}")));
    }
    if k < 0 {
        return Err(domain(format!("poisson count must be >= 0, got {k}")));
    }
    Ok(poisson_unchecked(mean, k as u64))
}

fn poisson_unchecked(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k <= 20 {
        let mut p = (-mean).exp();
        for i in 1..=k {
            p *= mean / i as f64;
        }
        p
    } else {
        let ln_fact: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
        (k as f64 * mean.ln() - mean - ln_fact).exp()
    }
}

/// Probability of exactly `k` successes in `n` Bernoulli(`p`) trials.
pub fn binomial_pmf(n: u64, p: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("probability must lie in [0, 1], got {p}")));
    }
    if k > n {
        return Err(domain(format!("successes {k} exceed trials {n}")));
    }
    let coeff = match binomial_coefficient(n as u128, k as u128) {
        Some(c) => c as f64,
        None => ln_binomial(n, k).exp(),
    };
    Ok(coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32))
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    let ln_fact = |m: u64| (2..=m).map(|i| (i as f64).ln()).sum::<f64>();
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

/// Per-cycle arrival count distribution for one instruction type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArrivalDist {
    Poisson { mean: f64 },
    /// Explicit pmf, `pmf[k]` = probability of `k` arrivals.
    Table { pmf: Vec<f64> },
}

impl ArrivalDist {
    pub fn poisson(mean: f64) -> Result<Self> {
        let dist = Self::Poisson { mean };
        dist.validate()?;
        Ok(dist)
    }

    pub fn table(pmf: Vec<f64>) -> Result<Self> {
        let dist = Self::Table { pmf };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Poisson { mean } => {
                if !(mean.is_finite() && *mean >= 0.0) {
                    return Err(domain(format!("poisson mean must be finite and >= 0, got {mean}")));
                }
            }
            Self::Table { pmf } => {
                if pmf.is_empty() {
                    return Err(domain("pmf table is empty"));
                }
                if let Some(bad) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                    return Err(domain(format!("pmf entries must be finite and >= 0, got {bad}")));
                }
                let mass: f64 = pmf.iter().sum();
                if (mass - 1.0).abs() > TABLE_MASS_TOLERANCE {
                    return Err(domain(format!("pmf table sums to {mass}, expected 1")));
                }
            }
        }
        Ok(())
    }

    /// Probability of `k` arrivals in a cycle; zero for negative `k`.
    pub fn pmf(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        match self {
            Self::Poisson { mean } => poisson_unchecked(*mean, k as u64),
            Self::Table { pmf } => pmf.get(k as usize).copied().unwrap_or(0.0),
        }
    }

    /// Mean arrivals per cycle.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Poisson { mean } => *mean,
            Self::Table { pmf } => pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum(),
        }
    }
}

/// Probability that a resident instruction has its operands ready in a cycle.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Readiness(f64);

impl Readiness {
    pub fn new(rho: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&rho) {
            Ok(Self(rho))
        } else {
            Err(domain(format!("readiness must lie in [0, 1], got {rho}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Readiness {
    type Error = crate::error::ModelError;

    fn try_from(rho: f64) -> Result<Self> {
        Self::new(rho)
    }
}

impl From<Readiness> for f64 {
    fn from(r: Readiness) -> f64 {
        r.0
    }
}
