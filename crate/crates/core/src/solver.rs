//! Per-cycle chain, stationary distribution and queue metrics.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::matrix::{MatrixRole, TransitionMatrix};
use crate::multi_type::{joint_matrices, ModelConfig};
use crate::state_space::StateSpace;

/// Stop once the L1 change between successive iterates drops below this.
pub const L1_CHANGE_TOLERANCE: f64 = 1e-13;
/// Largest accepted `max |πP - π|`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 1_000_000;
/// Queue lengths at or below this count as empty when forming flow ratios.
pub const EMPTY_QUEUE_EPSILON: f64 = 1e-12;

/// Non-fatal findings attached to a solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Diagnostic {
    /// The chain has more than one closed class, so the stationary vector
    /// depends on the starting distribution (uniform here).
    NonUnique { closed_classes: usize },
    /// `L_t` is zero (up to round-off), so `μ_t / L_t` is undefined for this type.
    FlowRatioUndefined { type_index: usize },
}

/// Builds the per-cycle matrix `P = C × A` (issue, then dispatch).
pub fn complete_matrix(consumption: &TransitionMatrix, arrival: &TransitionMatrix) -> Result<TransitionMatrix> {
    if consumption.role() != MatrixRole::Consumption || arrival.role() != MatrixRole::Arrival {
        return Err(ModelError::DimensionMismatch(format!(
            "expected consumption x arrival, got {:?} x {:?}",
            consumption.role(),
            arrival.role()
        )));
    }
    consumption.multiply(arrival, MatrixRole::Complete)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub diagnostics: Vec<Diagnostic>,
}

fn residual(p: &TransitionMatrix, pi: &[f64]) -> f64 {
    p.left_multiply(pi)
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Number of closed communicating classes of the chain.
fn closed_classes(p: &TransitionMatrix) -> usize {
    let n = p.dim();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for (j, &w) in p.row(i).iter().enumerate() {
            if w > 0.0 && i != j {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut component = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            component[v.index()] = c;
        }
    }
    sccs.iter()
        .enumerate()
        .filter(|(c, members)| {
            members.iter().all(|v| {
                let i = v.index();
                p.row(i)
                    .iter()
                    .enumerate()
                    .all(|(j, &w)| w == 0.0 || component[j] == *c)
            })
        })
        .count()
}

/// Left fixed point of `p` by power iteration from the uniform vector.
pub fn steady_state(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    p.check_stochastic(1e-9)?;
    let n = p.dim();
    if n == 0 {
        return Err(ModelError::DimensionMismatch("empty transition matrix".into()));
    }

    let mut pi = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let mut next = p.left_multiply(&pi);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        iterations += 1;
        if change < L1_CHANGE_TOLERANCE {
            converged = true;
            break;
        }
    }

    let res = residual(p, &pi);
    if !converged && res > RESIDUAL_TOLERANCE {
        return Err(ModelError::NoConvergence {
            iterations,
            residual: res,
        });
    }
    if res > RESIDUAL_TOLERANCE {
        return Err(ModelError::Numerical(format!("stationary residual {res:e} too large")));
    }

    let mut diagnostics = Vec::new();
    let classes = closed_classes(p);
    if classes > 1 {
        diagnostics.push(Diagnostic::NonUnique {
            closed_classes: classes,
        });
    }
    Ok(StationaryDistribution {
        pi,
        iterations,
        residual: res,
        diagnostics,
    })
}

/// Stationary distribution plus the per-type queue figures derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateReport {
    pub pi: Vec<f64>,
    pub l_per_type: Vec<f64>,
    pub l_total: f64,
    /// `μ_t / L_t`; `None` where `L_t = 0`.
    pub flow_ratio: Vec<Option<f64>>,
    /// Stationary probability that the queue is full.
    pub p_full: f64,
    pub iterations: usize,
    pub residual: f64,
    pub diagnostics: Vec<Diagnostic>,
}

impl SteadyStateReport {
    /// Ratio between the best and worst flow ratio, with the index of the
    /// worst type: a rough factor by which that type's unit count would have
    /// to grow to even out the flow ratios.
    pub fn flow_balance_hint(&self) -> Option<(usize, f64)> {
        let defined: Vec<(usize, f64)> = self
            .flow_ratio
            .iter()
            .enumerate()
            .filter_map(|(t, r)| r.map(|r| (t, r)))
            .collect();
        if defined.len() < 2 {
            return None;
        }
        let (worst, low) = defined
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        let high = defined.iter().map(|d| d.1).fold(f64::MIN, f64::max);
        Some((worst, high / low))
    }
}

/// Queue-length metrics of `pi` over `space`.
pub fn metrics(pi: &[f64], space: &StateSpace, config: &ModelConfig) -> Result<SteadyStateReport> {
    if pi.len() != space.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "distribution has {} entries for {} states",
            pi.len(),
            space.len()
        )));
    }
    let types = space.types();
    let mut l_per_type = vec![0.0; types];
    let mut l_total = 0.0;
    let mut p_full = 0.0;
    for (k, (s, &w)) in space.states().iter().zip(pi).enumerate() {
        for (t, l) in l_per_type.iter_mut().enumerate() {
            *l += s.count(t) as f64 * w;
        }
        l_total += s.occupancy() as f64 * w;
        if space.is_boundary(k) {
            p_full += w;
        }
    }

    let means = config.means();
    let mut diagnostics = Vec::new();
    let flow_ratio = l_per_type
        .iter()
        .zip(&means)
        .enumerate()
        .map(|(t, (&l, &mu))| {
            if l > EMPTY_QUEUE_EPSILON {
                Some(mu / l)
            } else {
                diagnostics.push(Diagnostic::FlowRatioUndefined { type_index: t });
                None
            }
        })
        .collect();

    Ok(SteadyStateReport {
        pi: pi.to_vec(),
        l_per_type,
        l_total,
        flow_ratio,
        p_full,
        iterations: 0,
        residual: 0.0,
        diagnostics,
    })
}

/// Everything built for one model: the state space, the three matrices and
/// the steady-state report.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub space: StateSpace,
    pub consumption: TransitionMatrix,
    pub arrival: TransitionMatrix,
    pub complete: TransitionMatrix,
    pub report: SteadyStateReport,
}

/// Runs the whole pipeline for `config`.
pub fn analyze(config: &ModelConfig) -> Result<Analysis> {
    config.validate()?;
    let space = config.state_space()?;
    let (consumption, arrival) = joint_matrices(config, &space)?;
    let complete = complete_matrix(&consumption, &arrival)?;
    let stationary = steady_state(&complete)?;
    let mut report = metrics(&stationary.pi, &space, config)?;
    report.iterations = stationary.iterations;
    report.residual = stationary.residual;
    let mut diagnostics = stationary.diagnostics;
    diagnostics.append(&mut report.diagnostics);
    report.diagnostics = diagnostics;
    Ok(Analysis {
        space,
        consumption,
        arrival,
        complete,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_type::InstructionType;

    fn rows(m: &[&[f64]]) -> TransitionMatrix {
        let v: Vec<Vec<f64>> = m.iter().map(|r| r.to_vec()).collect();
        TransitionMatrix::from_rows(MatrixRole::Generic, &v).unwrap()
    }

    #[test]
    fn three_state_chain() {
        let p = rows(&[&[0.25, 0.75, 0.0], &[0.30, 0.60, 0.10], &[0.0, 0.80, 0.20]]);
        let s = steady_state(&p).unwrap();
        for (got, want) in s.pi.iter().zip([0.262, 0.656, 0.082]) {
            assert!((got - want).abs() <= 1e-3);
        }
        assert!(s.residual <= RESIDUAL_TOLERANCE);
        assert!(s.diagnostics.is_empty());
        // detailed balance gives π ∝ [16, 40, 5]
        let exact = [16.0 / 61.0, 40.0 / 61.0, 5.0 / 61.0];
        for (got, want) in s.pi.iter().zip(exact) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_returns_uniform_with_warning() {
        let p = TransitionMatrix::identity(MatrixRole::Complete, 4);
        let s = steady_state(&p).unwrap();
        assert_eq!(s.pi, vec![0.25; 4]);
        assert_eq!(s.iterations, 1);
        assert_eq!(s.diagnostics, vec![Diagnostic::NonUnique { closed_classes: 4 }]);
    }

    #[test]
    fn periodic_chain_does_not_converge() {
        let p = rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        // uniform start is already stationary for the flip chain
        assert!(steady_state(&p).is_ok());
        let p = rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        assert!(steady_state(&p).is_ok());
    }

    #[test]
    fn periodic_chain_from_skewed_matrix_fails() {
        // period two with unequal class sizes: uniform start oscillates forever
        let p = rows(&[&[0.0, 0.5, 0.5], &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        assert!(matches!(steady_state(&p), Err(ModelError::NoConvergence { .. })));
    }

    #[test]
    fn complete_requires_roles() {
        let c = TransitionMatrix::identity(MatrixRole::Consumption, 3);
        let a = TransitionMatrix::identity(MatrixRole::Arrival, 3);
        assert!(complete_matrix(&c, &a).is_ok());
        assert!(complete_matrix(&a, &c).is_err());
        let a4 = TransitionMatrix::identity(MatrixRole::Arrival, 4);
        assert!(complete_matrix(&c, &a4).is_err());
    }

    #[test]
    fn zero_length_type_flags_flow_ratio() {
        let cfg = ModelConfig::new(
            2,
            vec![
                InstructionType::poisson("busy", 1.0, 0.5, 1).unwrap(),
                InstructionType::poisson("idle", 0.0, 0.5, 1).unwrap(),
            ],
        )
        .unwrap();
        let analysis = analyze(&cfg).unwrap();
        assert_eq!(analysis.report.flow_ratio[1], None);
        assert!(analysis
            .report
            .diagnostics
            .contains(&Diagnostic::FlowRatioUndefined { type_index: 1 }));
    }

    #[test]
    fn metrics_rejects_wrong_length() {
        let cfg = ModelConfig::new(2, vec![InstructionType::poisson("x", 1.0, 0.5, 1).unwrap()]).unwrap();
        let space = cfg.state_space().unwrap();
        assert!(metrics(&[1.0], &space, &cfg).is_err());
    }

    #[test]
    fn flow_balance_hint_picks_lowest_ratio() {
        let report = SteadyStateReport {
            pi: vec![],
            l_per_type: vec![],
            l_total: 0.0,
            flow_ratio: vec![Some(1.098), Some(0.874)],
            p_full: 0.0,
            iterations: 0,
            residual: 0.0,
            diagnostics: vec![],
        };
        let (t, factor) = report.flow_balance_hint().unwrap();
        assert_eq!(t, 1);
        assert!((factor - 1.256).abs() < 1e-3);
    }
}
