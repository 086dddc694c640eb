//! Seeded Monte Carlo simulation of the issue queue.
//!
//! Each cycle issues first, then dispatches. Issue draws the number of ready
//! instructions of each type from a binomial and sends at most `fu` of them.
//! Dispatch draws each type's arrivals independently; if they all fit with
//! room to spare they are added, otherwise the free slots are filled one by
//! one with types drawn in proportion to the arrival means. This matches the
//! analytic arrival matrix, including its treatment of the full states.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::ArrivalDist;
use crate::error::{domain, ModelError, Result};
use crate::multi_type::{type_probability, ModelConfig};
use crate::state_space::{OccupancyState, StateSpace};

pub const GENERATOR: &str = "ChaCha8Rng";
pub const DEFAULT_WARMUP: u64 = 1_000;
pub const DEFAULT_CYCLES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: ModelConfig,
    /// Total simulated cycles, warmup included.
    pub cycles: u64,
    pub warmup: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(model: ModelConfig, seed: u64) -> Self {
        Self {
            model,
            cycles: DEFAULT_CYCLES,
            warmup: DEFAULT_WARMUP,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.cycles <= self.warmup {
            return Err(domain(format!(
                "cycles ({}) must exceed warmup ({})",
                self.cycles, self.warmup
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub empirical_pi: Vec<f64>,
    pub l_per_type: Vec<f64>,
    pub l_total: f64,
    pub cycles: u64,
    pub warmup: u64,
    pub seed: u64,
    pub generator: &'static str,
    /// Total-variation distance to a reference distribution, when one was given.
    pub tv_distance: Option<f64>,
}

impl SimReport {
    pub fn compare_with(&mut self, reference: &[f64]) -> Result<f64> {
        let tv = total_variation(&self.empirical_pi, reference)?;
        self.tv_distance = Some(tv);
        Ok(tv)
    }
}

/// Half the L1 distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "cannot compare distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[derive(Debug, Clone)]
enum ArrivalSampler {
    Never,
    Poisson(Poisson<f64>),
    Table(WeightedIndex<f64>),
}

impl ArrivalSampler {
    fn new(dist: &ArrivalDist) -> Result<Self> {
        match dist {
            ArrivalDist::Poisson { mean } if *mean == 0.0 => Ok(Self::Never),
            ArrivalDist::Poisson { mean } => Poisson::new(*mean)
                .map(Self::Poisson)
                .map_err(|e| domain(format!("poisson sampler: {e}"))),
            ArrivalDist::Table { pmf } => WeightedIndex::new(pmf)
                .map(Self::Table)
                .map_err(|e| domain(format!("pmf sampler: {e}"))),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Self::Never => 0,
            Self::Poisson(d) => d.sample(rng) as usize,
            Self::Table(d) => d.sample(rng),
        }
    }
}

/// Per-model sampling state, reusable across cycles.
#[derive(Debug, Clone)]
pub struct Simulator {
    capacity: usize,
    readiness: Vec<f64>,
    fu: Vec<usize>,
    arrivals: Vec<ArrivalSampler>,
    type_choice: WeightedIndex<f64>,
}

impl Simulator {
    pub fn new(model: &ModelConfig) -> Result<Self> {
        model.validate()?;
        let probs: Vec<f64> = (0..model.type_count())
            .map(|t| type_probability(model, t))
            .collect::<Result<_>>()?;
        Ok(Self {
            capacity: model.capacity,
            readiness: model.types.iter().map(|t| t.rho.get()).collect(),
            fu: model.fu_counts(),
            arrivals: model
                .types
                .iter()
                .map(|t| ArrivalSampler::new(&t.arrival))
                .collect::<Result<_>>()?,
            type_choice: WeightedIndex::new(&probs).map_err(|e| domain(format!("type sampler: {e}")))?,
        })
    }

    /// Advances `counts` by one cycle in place.
    pub fn step_counts<R: Rng + ?Sized>(&self, counts: &mut [usize], rng: &mut R) {
        self.issue(counts, rng);
        self.dispatch(counts, rng);
    }

    /// Issue substep: each type sends `min(ready, fu)` instructions.
    pub fn issue<R: Rng + ?Sized>(&self, counts: &mut [usize], rng: &mut R) {
        for (t, n) in counts.iter_mut().enumerate() {
            if *n == 0 {
                continue;
            }
            let ready = Binomial::new(*n as u64, self.readiness[t])
                .expect("readiness validated")
                .sample(rng) as usize;
            *n -= ready.min(self.fu[t]);
        }
    }

    /// Dispatch substep.
    pub fn dispatch<R: Rng + ?Sized>(&self, counts: &mut [usize], rng: &mut R) {
        let resident: usize = counts.iter().sum();
        let mut arrivals = Vec::with_capacity(counts.len());
        let mut arriving = 0usize;
        for sampler in &self.arrivals {
            let k = sampler.sample(rng);
            arriving = arriving.saturating_add(k);
            arrivals.push(k);
        }
        if resident + arriving < self.capacity {
            for (n, k) in counts.iter_mut().zip(arrivals) {
                *n += k;
            }
        } else {
            for _ in resident..self.capacity {
                counts[self.type_choice.sample(rng)] += 1;
            }
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, state: &OccupancyState, rng: &mut R) -> OccupancyState {
        let mut counts = state.counts().to_vec();
        self.step_counts(&mut counts, rng);
        OccupancyState::new(counts)
    }
}

/// One simulated cycle from `state`.
pub fn step<R: Rng + ?Sized>(state: &OccupancyState, model: &ModelConfig, rng: &mut R) -> Result<OccupancyState> {
    Ok(Simulator::new(model)?.step(state, rng))
}

/// Simulates `sim.cycles` cycles from the empty queue and tallies the
/// post-dispatch state of every cycle after the warmup.
pub fn run(sim: &SimConfig) -> Result<SimReport> {
    sim.validate()?;
    let space = sim.model.state_space()?;
    let simulator = Simulator::new(&sim.model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);

    let mut visits = vec![0u64; space.len()];
    let mut counts = vec![0usize; space.types()];
    for cycle in 0..sim.cycles {
        simulator.step_counts(&mut counts, &mut rng);
        if cycle >= sim.warmup {
            let k = space
                .index_of_counts(&counts)
                .expect("simulated occupancy stays within capacity");
            visits[k] += 1;
        }
    }
    Ok(report_from_visits(&space, &visits, sim))
}

fn report_from_visits(space: &StateSpace, visits: &[u64], sim: &SimConfig) -> SimReport {
    let tallied: u64 = visits.iter().sum();
    let empirical_pi: Vec<f64> = visits.iter().map(|&v| v as f64 / tallied as f64).collect();
    summarize(space, empirical_pi, sim)
}

fn summarize(space: &StateSpace, empirical_pi: Vec<f64>, sim: &SimConfig) -> SimReport {
    let mut l_per_type = vec![0.0; space.types()];
    let mut l_total = 0.0;
    for (s, &w) in space.states().iter().zip(&empirical_pi) {
        for (t, l) in l_per_type.iter_mut().enumerate() {
            *l += s.count(t) as f64 * w;
        }
        l_total += s.occupancy() as f64 * w;
    }
    SimReport {
        empirical_pi,
        l_per_type,
        l_total,
        cycles: sim.cycles,
        warmup: sim.warmup,
        seed: sim.seed,
        generator: GENERATOR,
        tv_distance: None,
    }
}

/// Runs `replicas` independent simulations with seeds `seed, seed+1, ...`
/// and averages their visit frequencies in seed order.
pub fn run_replicas(sim: &SimConfig, replicas: usize) -> Result<SimReport> {
    if replicas == 0 {
        return Err(domain("at least one replica is required"));
    }
    let reports: Vec<SimReport> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut replica = sim.clone();
            replica.seed = sim.seed.wrapping_add(r);
            run(&replica)
        })
        .collect::<Result<_>>()?;

    let space = sim.model.state_space()?;
    let mut pi = vec![0.0; space.len()];
    for report in &reports {
        for (acc, p) in pi.iter_mut().zip(&report.empirical_pi) {
            *acc += p;
        }
    }
    pi.iter_mut().for_each(|p| *p /= replicas as f64);
    Ok(summarize(&space, pi, sim))
}

/// Empirical one-cycle transition frequencies out of state `from`.
pub fn sample_transitions(
    model: &ModelConfig,
    space: &StateSpace,
    from: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let simulator = Simulator::new(model)?;
    let start = space
        .states()
        .get(from)
        .ok_or_else(|| domain(format!("state index {from} out of range")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut visits = vec![0u64; space.len()];
    let mut counts = vec![0usize; space.types()];
    for _ in 0..trials {
        counts.copy_from_slice(start.counts());
        simulator.step_counts(&mut counts, &mut rng);
        visits[space.index_of_counts(&counts).expect("within capacity")] += 1;
    }
    Ok(visits.iter().map(|&v| v as f64 / trials as f64).collect())
}
