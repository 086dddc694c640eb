use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::CliError;

/// Issue-queue Markov model: steady state, simulation and FU provisioning.
#[derive(Debug, Parser)]
#[command(name = "iqchain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the stationary distribution and queue lengths.
    Solve(Common),
    /// Run the Monte Carlo simulator.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Hill-climb to the cheapest functional-unit configuration.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchArgs,
        /// Evaluate the whole grid instead of hill climbing.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Evaluate the full cost surface and write it as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Solve and simulate, failing when the two disagree.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// Largest accepted total-variation distance.
        #[arg(long, default_value_t = 0.02)]
        tv_threshold: f64,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON experiment file.
    config: PathBuf,
    /// Directory for report files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Simulated cycles, warmup included.
    #[arg(long, default_value_t = iqchain::sim::DEFAULT_CYCLES)]
    cycles: u64,
    #[arg(long, default_value_t = iqchain::sim::DEFAULT_WARMUP)]
    warmup: u64,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Upper bound on units per type.
    #[arg(long, default_value_t = iqchain::optimizer::DEFAULT_FU_MAX)]
    fu_max: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(c) => commands::solve(&c.config, &c.out),
        Command::Simulate { common, sim } => {
            commands::simulate(&common.config, &common.out, sim.seed, sim.cycles, sim.warmup)
        }
        Command::Optimize {
            common,
            search,
            exhaustive,
        } => commands::optimize(&common.config, &common.out, search.fu_max, exhaustive),
        Command::Sweep { common, search } => commands::sweep(&common.config, &common.out, search.fu_max),
        Command::Validate {
            common,
            sim,
            tv_threshold,
        } => commands::validate(
            &common.config,
            &common.out,
            sim.seed,
            sim.cycles,
            sim.warmup,
            tv_threshold,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("iqchain: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(iqchain::config::ConfigError::Io { .. }) => 1,
            CliError::Config(_) => 2,
            CliError::Model(e) => commands::model_exit_code(e),
            CliError::Threshold { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }
}
