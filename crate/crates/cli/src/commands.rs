use std::fs;
use std::path::{Path, PathBuf};

use iqchain::config::{ConfigError, ExperimentFile};
use iqchain::optimizer::{self, check_convexity, write_surface_csv, OptimizationResult, SearchDiagnostic};
use iqchain::report::{distribution_csv, simulation_json, steady_state_json, to_fixed_json};
use iqchain::sim::{self, SimConfig};
use iqchain::{analyze, ModelConfig, ModelError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("total-variation distance {tv:.6} exceeds threshold {threshold}")]
    Threshold { tv: f64, threshold: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub fn model_exit_code(e: &ModelError) -> u8 {
    match e {
        ModelError::Domain(_)
        | ModelError::CapacityExceeded { .. }
        | ModelError::DimensionMismatch(_)
        | ModelError::EvaluationCapExceeded { .. } => 2,
        ModelError::Overflow(_) | ModelError::Numerical(_) | ModelError::NoConvergence { .. } => 3,
    }
}

fn load(config: &Path) -> Result<(ExperimentFile, ModelConfig), CliError> {
    let file = ExperimentFile::load(config)?;
    let model = file.model()?;
    Ok((file, model))
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io(&path))?;
    Ok(path)
}

fn type_label(model: &ModelConfig, t: usize) -> String {
    let name = &model.types[t].name;
    if name.is_empty() {
        format!("type {}", t + 1)
    } else {
        name.clone()
    }
}

pub fn solve(config: &Path, out: &Path) -> Result<(), CliError> {
    let (_, model) = load(config)?;
    let analysis = analyze(&model)?;
    let report = &analysis.report;

    let json = write(out, "report.json", steady_state_json(report).as_bytes())?;
    let mut csv = Vec::new();
    distribution_csv(&analysis.space, &report.pi, &mut csv).expect("in-memory write");
    let csv = write(out, "pi.csv", &csv)?;

    println!("states: {}", analysis.space.len());
    for t in 0..model.type_count() {
        let ratio = report.flow_ratio[t].map_or("undefined".to_string(), |r| format!("{r:.3}"));
        println!(
            "{}: L = {:.3}, R = {ratio}",
            type_label(&model, t),
            report.l_per_type[t]
        );
    }
    println!("L = {:.3}", report.l_total);
    println!("queue full {:.1}% of cycles", 100.0 * report.p_full);
    if let Some((t, factor)) = report.flow_balance_hint() {
        println!(
            "suggestion: {} has the lowest flow ratio; scaling its unit count by {factor:.3} would, in theory, even out the ratios",
            type_label(&model, t)
        );
    }
    for d in &report.diagnostics {
        println!("warning: {d:?}");
    }
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

pub fn simulate(config: &Path, out: &Path, seed: u64, cycles: u64, warmup: u64) -> Result<(), CliError> {
    let (_, model) = load(config)?;
    let sim = SimConfig {
        model: model.clone(),
        cycles,
        warmup,
        seed,
    };
    let report = sim::run(&sim)?;
    let space = model.state_space()?;

    let json = write(out, "sim_report.json", simulation_json(&report).as_bytes())?;
    let mut csv = Vec::new();
    distribution_csv(&space, &report.empirical_pi, &mut csv).expect("in-memory write");
    let csv = write(out, "sim_pi.csv", &csv)?;

    println!("simulated {cycles} cycles ({warmup} warmup) with {} seed {seed}", report.generator);
    for t in 0..model.type_count() {
        println!("{}: L = {:.3}", type_label(&model, t), report.l_per_type[t]);
    }
    println!("L = {:.3}", report.l_total);
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

#[derive(Serialize)]
struct SearchJson<'a> {
    method: &'a str,
    best_config: &'a [usize],
    best_cost: f64,
    evaluations: usize,
    diagnostics: &'a [SearchDiagnostic],
}

fn write_search(out: &Path, stem: &str, method: &str, result: &OptimizationResult) -> Result<(), CliError> {
    let json = to_fixed_json(&SearchJson {
        method,
        best_config: &result.best_config,
        best_cost: result.best_cost,
        evaluations: result.evaluations,
        diagnostics: &result.diagnostics,
    });
    let json = write(out, &format!("{stem}.json"), json.as_bytes())?;
    let mut csv = Vec::new();
    write_surface_csv(result, &mut csv).expect("in-memory write");
    let csv = write(out, "surface.csv", &csv)?;

    println!(
        "{method}: best configuration {:?} with cost {:.3} after {} evaluations",
        result.best_config, result.best_cost, result.evaluations
    );
    for d in &result.diagnostics {
        println!("warning: {d:?}");
    }
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

pub fn optimize(config: &Path, out: &Path, fu_max: usize, exhaustive: bool) -> Result<(), CliError> {
    let (file, model) = load(config)?;
    let costs = file.costs(fu_max)?;
    if exhaustive {
        let grid = optimizer::grid_search(&model, &costs)?;
        let mut hill = optimizer::hill_climb(&model, &costs)?;
        let mut grid_with_check = grid.clone();
        if !check_convexity(&mut hill, &grid) {
            grid_with_check.diagnostics = hill.diagnostics;
        }
        write_search(out, "optimize", "grid", &grid_with_check)
    } else {
        let hill = optimizer::hill_climb(&model, &costs)?;
        write_search(out, "optimize", "hill_climb", &hill)
    }
}

pub fn sweep(config: &Path, out: &Path, fu_max: usize) -> Result<(), CliError> {
    let (file, model) = load(config)?;
    let costs = file.costs(fu_max)?;
    let grid = optimizer::grid_search(&model, &costs)?;
    write_search(out, "sweep", "grid", &grid)
}

#[derive(Serialize)]
struct ValidateJson<'a> {
    tv_distance: f64,
    threshold: f64,
    passed: bool,
    analytic_l_per_type: &'a [f64],
    empirical_l_per_type: &'a [f64],
    seed: u64,
    cycles: u64,
    warmup: u64,
}

pub fn validate(
    config: &Path,
    out: &Path,
    seed: u64,
    cycles: u64,
    warmup: u64,
    threshold: f64,
) -> Result<(), CliError> {
    let (_, model) = load(config)?;
    let analysis = analyze(&model)?;
    let mut report = sim::run(&SimConfig {
        model: model.clone(),
        cycles,
        warmup,
        seed,
    })?;
    let tv = report.compare_with(&analysis.report.pi)?;
    let passed = tv <= threshold;

    let json = to_fixed_json(&ValidateJson {
        tv_distance: tv,
        threshold,
        passed,
        analytic_l_per_type: &analysis.report.l_per_type,
        empirical_l_per_type: &report.l_per_type,
        seed,
        cycles,
        warmup,
    });
    let path = write(out, "validate.json", json.as_bytes())?;

    for t in 0..model.type_count() {
        println!(
            "{}: analytic L = {:.4}, simulated L = {:.4}",
            type_label(&model, t),
            analysis.report.l_per_type[t],
            report.l_per_type[t]
        );
    }
    println!(
        "TV distance {tv:.6} (threshold {threshold}): {}",
        if passed { "PASS" } else { "FAIL" }
    );
    println!("wrote {}", path.display());
    if passed {
        Ok(())
    } else {
        Err(CliError::Threshold { tv, threshold })
    }
}
