//! Functional-unit provisioning: cost of a configuration and searches over
//! the integer grid of unit counts.
//!
//! The cost of a configuration is the sum over types of the expected queue
//! length plus the hardware cost `unit_cost[t] * fu[t]`.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, ModelError, Result};
use crate::multi_type::ModelConfig;
use crate::solver::analyze;

pub const DEFAULT_FU_MAX: usize = 8;
pub const DEFAULT_EVALUATION_CAP: usize = 4_096;

#[derive(Debug, Clone, PartialEq)]
pub struct FuCostParams {
    pub unit_cost: Vec<f64>,
    pub fu_min: Vec<usize>,
    pub fu_max: Vec<usize>,
}

impl FuCostParams {
    /// Costs with the default search bounds `1..=8` per type.
    pub fn new(unit_cost: Vec<f64>) -> Result<Self> {
        let n = unit_cost.len();
        Self::with_bounds(unit_cost, vec![1; n], vec![DEFAULT_FU_MAX; n])
    }

    pub fn with_bounds(unit_cost: Vec<f64>, fu_min: Vec<usize>, fu_max: Vec<usize>) -> Result<Self> {
        let params = Self {
            unit_cost,
            fu_min,
            fu_max,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.unit_cost.len();
        if n == 0 || self.fu_min.len() != n || self.fu_max.len() != n {
            return Err(ModelError::DimensionMismatch(
                "unit_cost, fu_min and fu_max must have one entry per type".into(),
            ));
        }
        for t in 0..n {
            if !(self.unit_cost[t].is_finite() && self.unit_cost[t] >= 0.0) {
                return Err(domain(format!("unit_cost[{t}] must be finite and >= 0")));
            }
            if self.fu_min[t] < 1 || self.fu_min[t] > self.fu_max[t] {
                return Err(domain(format!(
                    "bounds for type {t} must satisfy 1 <= fu_min <= fu_max, got {}..={}",
                    self.fu_min[t], self.fu_max[t]
                )));
            }
        }
        Ok(())
    }

    fn within_bounds(&self, fu: &[usize]) -> bool {
        fu.iter()
            .enumerate()
            .all(|(t, &f)| self.fu_min[t] <= f && f <= self.fu_max[t])
    }

    fn grid_size(&self) -> u128 {
        self.fu_min
            .iter()
            .zip(&self.fu_max)
            .map(|(&lo, &hi)| (hi - lo + 1) as u128)
            .product()
    }
}

/// Cost of one unit-count configuration, with the queue lengths behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostEvaluation {
    pub fu: Vec<usize>,
    pub l_per_type: Vec<f64>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum SearchDiagnostic {
    /// The hill climb stopped at a configuration costlier than the grid minimum.
    ConvexityViolation {
        local: Vec<usize>,
        local_cost: f64,
        global: Vec<usize>,
        global_cost: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_config: Vec<usize>,
    pub best_cost: f64,
    /// Every evaluated configuration, keyed by unit counts.
    pub surface: BTreeMap<Vec<usize>, CostEvaluation>,
    /// Number of full model solves performed.
    pub evaluations: usize,
    pub diagnostics: Vec<SearchDiagnostic>,
}

/// Solves `model` with the unit counts in `fu` and prices the result.
pub fn evaluate(model: &ModelConfig, costs: &FuCostParams, fu: &[usize]) -> Result<CostEvaluation> {
    if costs.unit_cost.len() != model.type_count() {
        return Err(ModelError::DimensionMismatch(format!(
            "{} unit costs for {} types",
            costs.unit_cost.len(),
            model.type_count()
        )));
    }
    let configured = model.with_fu(fu)?;
    let report = analyze(&configured)?.report;
    let cost = report
        .l_per_type
        .iter()
        .zip(&costs.unit_cost)
        .zip(fu)
        .map(|((l, c), &f)| l + c * f as f64)
        .sum();
    Ok(CostEvaluation {
        fu: fu.to_vec(),
        l_per_type: report.l_per_type,
        cost,
    })
}

/// Total cost of the unit counts already set on `model`.
pub fn configuration_cost(model: &ModelConfig, costs: &FuCostParams) -> Result<f64> {
    Ok(evaluate(model, costs, &model.fu_counts())?.cost)
}

/// Greedy descent from one unit per type (raised to the lower bounds).
///
/// Each round evaluates the `±1` neighbours along every axis and moves to the
/// cheapest one if it is strictly cheaper than the current configuration.
/// Equal costs resolve to the lexicographically smallest configuration.
pub fn hill_climb(model: &ModelConfig, costs: &FuCostParams) -> Result<OptimizationResult> {
    costs.validate()?;
    let mut surface = BTreeMap::new();
    let mut evaluations = 0;
    let mut cost_of = |fu: &[usize], surface: &mut BTreeMap<Vec<usize>, CostEvaluation>| -> Result<f64> {
        if let Some(e) = surface.get(fu) {
            return Ok(e.cost);
        }
        let e = evaluate(model, costs, fu)?;
        evaluations += 1;
        let cost = e.cost;
        surface.insert(fu.to_vec(), e);
        Ok(cost)
    };

    let mut current: Vec<usize> = costs.fu_min.iter().map(|&lo| lo.max(1)).collect();
    let mut current_cost = cost_of(&current, &mut surface)?;
    loop {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for t in 0..current.len() {
            for delta in [-1i64, 1] {
                let f = current[t] as i64 + delta;
                if f < 1 {
                    continue;
                }
                let mut neighbour = current.clone();
                neighbour[t] = f as usize;
                if !costs.within_bounds(&neighbour) {
                    continue;
                }
                let c = cost_of(&neighbour, &mut surface)?;
                let better = match &best {
                    None => true,
                    Some((b, bc)) => c < *bc || (c == *bc && neighbour < *b),
                };
                if better {
                    best = Some((neighbour, c));
                }
            }
        }
        match best {
            Some((next, c)) if c < current_cost => {
                current = next;
                current_cost = c;
            }
            _ => break,
        }
    }

    Ok(OptimizationResult {
        best_config: current,
        best_cost: current_cost,
        surface,
        evaluations,
        diagnostics: Vec::new(),
    })
}

/// Evaluates every configuration within the bounds.
pub fn grid_search(model: &ModelConfig, costs: &FuCostParams) -> Result<OptimizationResult> {
    grid_search_capped(model, costs, DEFAULT_EVALUATION_CAP)
}

pub fn grid_search_capped(model: &ModelConfig, costs: &FuCostParams, cap: usize) -> Result<OptimizationResult> {
    costs.validate()?;
    let requested = costs.grid_size();
    if requested > cap as u128 {
        return Err(ModelError::EvaluationCapExceeded { requested, cap });
    }

    // lexicographic enumeration of the box
    let mut configs = Vec::with_capacity(requested as usize);
    let mut fu = costs.fu_min.clone();
    'outer: loop {
        configs.push(fu.clone());
        for t in (0..fu.len()).rev() {
            if fu[t] < costs.fu_max[t] {
                fu[t] += 1;
                continue 'outer;
            }
            fu[t] = costs.fu_min[t];
        }
        break;
    }

    let evaluated: Vec<CostEvaluation> = configs
        .par_iter()
        .map(|fu| evaluate(model, costs, fu))
        .collect::<Result<_>>()?;

    let mut best: Option<&CostEvaluation> = None;
    for e in &evaluated {
        if best.is_none_or(|b| e.cost < b.cost) {
            best = Some(e);
        }
    }
    let best = best.expect("grid has at least one point").clone();
    Ok(OptimizationResult {
        best_config: best.fu,
        best_cost: best.cost,
        evaluations: evaluated.len(),
        surface: evaluated.into_iter().map(|e| (e.fu.clone(), e)).collect(),
        diagnostics: Vec::new(),
    })
}

/// Compares a hill-climb result against the exhaustive minimum and records a
/// [`SearchDiagnostic::ConvexityViolation`] on the hill-climb result if the
/// local search stopped short.
pub fn check_convexity(local: &mut OptimizationResult, global: &OptimizationResult) -> bool {
    if local.best_cost > global.best_cost {
        local.diagnostics.push(SearchDiagnostic::ConvexityViolation {
            local: local.best_config.clone(),
            local_cost: local.best_cost,
            global: global.best_config.clone(),
            global_cost: global.best_cost,
        });
        false
    } else {
        true
    }
}

/// Writes the evaluated surface as CSV: `fu_1..fu_T, L_1..L_T, cost`.
pub fn write_surface_csv<W: Write>(result: &OptimizationResult, mut out: W) -> std::io::Result<()> {
    let types = result.best_config.len();
    let mut header: Vec<String> = (1..=types).map(|t| format!("fu_{t}")).collect();
    header.extend((1..=types).map(|t| format!("L_{t}")));
    header.push("cost".into());
    writeln!(out, "{}", header.join(","))?;
    for e in result.surface.values() {
        let mut cells: Vec<String> = e.fu.iter().map(|f| f.to_string()).collect();
        cells.extend(e.l_per_type.iter().map(|l| format!("{l:.6}")));
        cells.push(format!("{:.6}", e.cost));
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
