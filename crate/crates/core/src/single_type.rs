//! Issue and dispatch matrices for a queue holding a single instruction type.
//!
//! States are the occupancy counts `0..=capacity`.

use crate::distributions::{binomial_pmf, ArrivalDist, Readiness};
use crate::error::{domain, Result};
use crate::matrix::{MatrixRole, TransitionMatrix};

/// Inputs for the single-type chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleTypeParams {
    pub capacity: usize,
    pub fu: usize,
    pub rho: Readiness,
    pub arrival: ArrivalDist,
}

impl SingleTypeParams {
    pub fn new(capacity: usize, fu: usize, rho: f64, arrival: ArrivalDist) -> Result<Self> {
        if capacity == 0 {
            return Err(domain("queue capacity must be >= 1"));
        }
        if fu == 0 {
            return Err(domain("functional unit count must be >= 1"));
        }
        arrival.validate()?;
        Ok(Self {
            capacity,
            fu,
            rho: Readiness::new(rho)?,
            arrival,
        })
    }
}

/// Probability of going from `from` to `to` resident instructions during issue,
/// with `fu` functional units and readiness `rho`.
///
/// Fewer than `fu` issued means exactly that many were ready; exactly `fu`
/// issued means at least `fu` were ready.
pub(crate) fn issue_probability(from: usize, to: usize, fu: usize, rho: f64) -> f64 {
    if to > from {
        return 0.0;
    }
    let issued = from - to;
    let n = from as u64;
    if issued == fu {
        (fu..=from)
            .map(|k| binomial_pmf(n, rho, k as u64).expect("validated readiness"))
            .sum()
    } else if issued < fu {
        binomial_pmf(n, rho, issued as u64).expect("validated readiness")
    } else {
        0.0
    }
}

/// Issue-stage matrix over `0..=capacity`.
pub fn consumption_matrix_1d(capacity: usize, fu: usize, rho: Readiness) -> TransitionMatrix {
    let dim = capacity + 1;
    let mut c = TransitionMatrix::zeros(MatrixRole::Consumption, dim);
    for i in 0..dim {
        for j in i.saturating_sub(fu)..=i {
            c.set(i, j, issue_probability(i, j, fu, rho.get()));
        }
    }
    c
}

/// Dispatch-stage matrix over `0..=capacity`. Arrivals that would overflow the
/// queue are folded into the full state, so rows sum to one by construction.
pub fn arrival_matrix_1d(capacity: usize, arrival: &ArrivalDist) -> TransitionMatrix {
    let dim = capacity + 1;
    let mut a = TransitionMatrix::zeros(MatrixRole::Arrival, dim);
    for i in 0..dim {
        let mut below_full = 0.0;
        for j in i..capacity {
            let p = arrival.pmf((j - i) as i64);
            a.set(i, j, p);
            below_full += p;
        }
        a.set(i, capacity, (1.0 - below_full).max(0.0));
    }
    a
}

impl SingleTypeParams {
    pub fn consumption_matrix(&self) -> TransitionMatrix {
        consumption_matrix_1d(self.capacity, self.fu, self.rho)
    }

    pub fn arrival_matrix(&self) -> TransitionMatrix {
        arrival_matrix_1d(self.capacity, &self.arrival)
    }
}
