//! Joint issue and dispatch matrices over the multi-type state space.

use serde::{Deserialize, Serialize};

use crate::distributions::{ArrivalDist, Readiness};
use crate::error::{domain, ModelError, Result};
use crate::matrix::{MatrixRole, TransitionMatrix};
use crate::single_type::consumption_matrix_1d;
use crate::state_space::{binomial_coefficient, StateSpace};

/// Rows whose boundary remainder goes negative by less than this are clamped.
const REMAINDER_TOLERANCE: f64 = 1e-9;

/// One instruction type and the functional units that serve it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionType {
    #[serde(default)]
    pub name: String,
    pub arrival: ArrivalDist,
    pub rho: Readiness,
    pub fu: usize,
}

impl InstructionType {
    pub fn new(name: impl Into<String>, arrival: ArrivalDist, rho: f64, fu: usize) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            arrival,
            rho: Readiness::new(rho)?,
            fu,
        })
    }

    pub fn poisson(name: impl Into<String>, mean: f64, rho: f64, fu: usize) -> Result<Self> {
        Self::new(name, ArrivalDist::poisson(mean)?, rho, fu)
    }
}

/// Issue queue of `capacity` entries shared by several instruction types.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub capacity: usize,
    pub types: Vec<InstructionType>,
}

impl ModelConfig {
    pub fn new(capacity: usize, types: Vec<InstructionType>) -> Result<Self> {
        let config = Self { capacity, types };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(domain("queue capacity N must be >= 1"));
        }
        if self.types.is_empty() {
            return Err(domain("at least one instruction type is required"));
        }
        for (t, ty) in self.types.iter().enumerate() {
            ty.arrival
                .validate()
                .map_err(|e| domain(format!("types[{t}].arrival: {e}")))?;
            if ty.fu == 0 {
                return Err(domain(format!("types[{t}].fu must be >= 1")));
            }
        }
        if !(self.total_mean() > 0.0) {
            return Err(domain("sum of arrival means must be > 0"));
        }
        Ok(())
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn means(&self) -> Vec<f64> {
        self.types.iter().map(|t| t.arrival.mean()).collect()
    }

    pub fn fu_counts(&self) -> Vec<usize> {
        self.types.iter().map(|t| t.fu).collect()
    }

    fn total_mean(&self) -> f64 {
        self.types.iter().map(|t| t.arrival.mean()).sum()
    }

    /// Same model with the functional unit counts replaced.
    pub fn with_fu(&self, fu: &[usize]) -> Result<Self> {
        if fu.len() != self.types.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "{} unit counts for {} types",
                fu.len(),
                self.types.len()
            )));
        }
        let mut out = self.clone();
        for (ty, &f) in out.types.iter_mut().zip(fu) {
            ty.fu = f;
        }
        out.validate()?;
        Ok(out)
    }

    /// State space matching this model's type count and capacity.
    pub fn state_space(&self) -> Result<StateSpace> {
        StateSpace::new(self.type_count(), self.capacity)
    }

    fn check_space(&self, space: &StateSpace) -> Result<()> {
        if space.types() != self.type_count() || space.capacity() != self.capacity {
            return Err(ModelError::DimensionMismatch(format!(
                "state space is (T={}, N={}) but model is (T={}, N={})",
                space.types(),
                space.capacity(),
                self.type_count(),
                self.capacity
            )));
        }
        Ok(())
    }
}

/// Probability that the next incoming instruction is of type `t` (zero-based).
pub fn type_probability(config: &ModelConfig, t: usize) -> Result<f64> {
    let total = config.total_mean();
    if !(total > 0.0) {
        return Err(domain("type probabilities are undefined when every arrival mean is zero"));
    }
    let ty = config
        .types
        .get(t)
        .ok_or_else(|| domain(format!("type index {t} out of range")))?;
    Ok(ty.arrival.mean() / total)
}

/// `(Σ n)! / Π n!`, the number of distinct orderings of a multiset.
pub fn multinomial_coefficient(counts: &[usize]) -> Result<u128> {
    let mut total: u128 = 0;
    let mut acc: u128 = 1;
    for &n in counts {
        total += n as u128;
        let c = binomial_coefficient(total, n as u128)
            .ok_or(ModelError::Overflow("multinomial coefficient"))?;
        acc = acc
            .checked_mul(c)
            .ok_or(ModelError::Overflow("multinomial coefficient"))?;
    }
    Ok(acc)
}

/// Multinomial probability of drawing exactly `counts[t]` of each type in
/// `Σ counts` independent draws with type probabilities `probs`.
fn multinomial_weight(counts: &[usize], probs: &[f64]) -> f64 {
    let power: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&n, &p)| p.powi(n as i32))
        .product();
    if power == 0.0 {
        return 0.0;
    }
    match multinomial_coefficient(counts) {
        Ok(c) => c as f64 * power,
        Err(_) => {
            let ln_fact = |m: usize| (2..=m).map(|i| (i as f64).ln()).sum::<f64>();
            let total: usize = counts.iter().sum();
            let ln = ln_fact(total)
                + counts
                    .iter()
                    .zip(probs)
                    .map(|(&n, &p)| if n == 0 { 0.0 } else { n as f64 * p.ln() - ln_fact(n) })
                    .sum::<f64>();
            ln.exp()
        }
    }
}

/// Joint issue-stage matrix: the product over types of each type's own
/// single-type issue probability.
pub fn joint_consumption_matrix(config: &ModelConfig, space: &StateSpace) -> Result<TransitionMatrix> {
    config.check_space(space)?;
    let per_type: Vec<TransitionMatrix> = config
        .types
        .iter()
        .map(|ty| consumption_matrix_1d(config.capacity, ty.fu, ty.rho))
        .collect();

    let mut c = TransitionMatrix::zeros(MatrixRole::Consumption, space.len());
    for (i, from) in space.states().iter().enumerate() {
        for (j, to) in space.states().iter().enumerate() {
            let mut p = 1.0;
            for (t, m) in per_type.iter().enumerate() {
                p *= m.get(from.count(t), to.count(t));
                if p == 0.0 {
                    break;
                }
            }
            c.set(i, j, p);
        }
    }
    Ok(c)
}

/// Joint dispatch-stage matrix.
///
/// Transitions that leave the queue below capacity take the product of the
/// raw per-type pmfs. The probability mass left over (some arrivals did not
/// fit) is spread across the full states by the multinomial law of the
/// extra instructions' types.
pub fn joint_arrival_matrix(config: &ModelConfig, space: &StateSpace) -> Result<TransitionMatrix> {
    config.check_space(space)?;
    let probs: Vec<f64> = (0..config.type_count())
        .map(|t| type_probability(config, t))
        .collect::<Result<_>>()?;
    let capacity = config.capacity;
    let types = config.type_count();

    let mut a = TransitionMatrix::zeros(MatrixRole::Arrival, space.len());
    let mut increments = vec![0usize; types];
    for (i, from) in space.states().iter().enumerate() {
        let row = a.row_mut(i);
        let mut below_full = 0.0;
        for (j, to) in space.states().iter().enumerate() {
            if to.occupancy() == capacity {
                continue;
            }
            let mut p = 1.0;
            for t in 0..types {
                p *= config.types[t]
                    .arrival
                    .pmf(to.count(t) as i64 - from.count(t) as i64);
                if p == 0.0 {
                    break;
                }
            }
            row[j] = p;
            below_full += p;
        }

        let mut remainder = 1.0 - below_full;
        let mut clamped = false;
        if remainder < 0.0 {
            if remainder < -REMAINDER_TOLERANCE {
                return Err(ModelError::Numerical(format!(
                    "arrival row {} has non-boundary mass {below_full} > 1",
                    from
                )));
            }
            remainder = 0.0;
            clamped = true;
        }

        for (j, to) in space.states().iter().enumerate() {
            if to.occupancy() != capacity {
                continue;
            }
            let reachable = (0..types).all(|t| to.count(t) >= from.count(t));
            if !reachable {
                continue;
            }
            for (t, inc) in increments.iter_mut().enumerate() {
                *inc = to.count(t) - from.count(t);
            }
            row[j] = remainder * multinomial_weight(&increments, &probs);
        }

        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > REMAINDER_TOLERANCE {
            return Err(ModelError::Numerical(format!(
                "arrival row {from} sums to {sum}"
            )));
        }
        if clamped {
            row.iter_mut().for_each(|p| *p /= sum);
        }
    }
    Ok(a)
}

/// Issue and dispatch matrices for `config`, in that order.
pub fn joint_matrices(config: &ModelConfig, space: &StateSpace) -> Result<(TransitionMatrix, TransitionMatrix)> {
    Ok((
        joint_consumption_matrix(config, space)?,
        joint_arrival_matrix(config, space)?,
    ))
}
