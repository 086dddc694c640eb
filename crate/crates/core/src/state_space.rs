//! Occupancy states of the issue queue.
//!
//! A state is the tuple of per-type instruction counts resident in the queue.
//! States are kept in lexicographic order (leftmost count most significant),
//! which fixes the row/column layout of every transition matrix.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{domain, ModelError, Result};

/// Largest state space the dense builders will accept.
pub const DEFAULT_STATE_CEILING: usize = 20_000;

/// Per-type instruction counts resident in the issue queue.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct OccupancyState(Box<[usize]>);

impl OccupancyState {
    pub fn new(counts: impl Into<Box<[usize]>>) -> Self {
        Self(counts.into())
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn count(&self, t: usize) -> usize {
        self.0[t]
    }

    pub fn types(&self) -> usize {
        self.0.len()
    }

    /// Total number of instructions in the queue.
    pub fn occupancy(&self) -> usize {
        self.0.iter().sum()
    }
}

impl fmt::Display for OccupancyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// True iff the queue is full in state `s`.
pub fn is_boundary(s: &OccupancyState, capacity: usize) -> bool {
    s.occupancy() == capacity
}

/// Exact binomial coefficient C(n, k) using the multiplicative form.
pub(crate) fn binomial_coefficient(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n.checked_sub(k)?);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n - k + i) is divisible by i at every step.
        acc = acc.checked_mul(n - k + i)? / i;
    }
    Some(acc)
}

/// Number of `types`-tuples of non-negative integers with sum at most `capacity`,
/// i.e. `(types + capacity)! / (capacity! * types!)`.
pub fn state_space_size(types: usize, capacity: usize) -> Result<u128> {
    if types == 0 || capacity == 0 {
        return Err(domain("state space needs at least one type and capacity >= 1"));
    }
    binomial_coefficient(types as u128 + capacity as u128, types as u128)
        .ok_or(ModelError::Overflow("state space size"))
}

/// Ordered enumeration of every occupancy state for `types` instruction types
/// sharing a queue of `capacity` entries.
#[derive(Debug, Clone)]
pub struct StateSpace {
    types: usize,
    capacity: usize,
    states: Vec<OccupancyState>,
    index: HashMap<OccupancyState, usize>,
}

impl StateSpace {
    pub fn new(types: usize, capacity: usize) -> Result<Self> {
        Self::with_ceiling(types, capacity, DEFAULT_STATE_CEILING)
    }

    pub fn with_ceiling(types: usize, capacity: usize, ceiling: usize) -> Result<Self> {
        let size = state_space_size(types, capacity)?;
        if size > ceiling as u128 {
            return Err(ModelError::CapacityExceeded {
                states: size,
                ceiling,
            });
        }

        let mut states = Vec::with_capacity(size as usize);
        let mut current = vec![0usize; types];
        enumerate_into(&mut states, &mut current, 0, capacity);
        debug_assert_eq!(states.len() as u128, size);

        let index = states
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), k))
            .collect();
        Ok(Self {
            types,
            capacity,
            states,
            index,
        })
    }

    pub fn types(&self) -> usize {
        self.types
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[OccupancyState] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &OccupancyState {
        &self.states[k]
    }

    pub fn index_of(&self, s: &OccupancyState) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Index of the state with the given counts.
    pub fn index_of_counts(&self, counts: &[usize]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        is_boundary(&self.states[k], self.capacity)
    }
}

impl std::borrow::Borrow<[usize]> for OccupancyState {
    fn borrow(&self) -> &[usize] {
        &self.0
    }
}

fn enumerate_into(out: &mut Vec<OccupancyState>, current: &mut [usize], pos: usize, left: usize) {
    if pos == current.len() {
        out.push(OccupancyState::new(current.to_vec()));
        return;
    }
    for n in 0..=left {
        current[pos] = n;
        enumerate_into(out, current, pos + 1, left - n);
    }
    current[pos] = 0;
}
