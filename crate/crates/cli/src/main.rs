mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use depeg_core::Fraction;
use serde_json::Value;

use commands::{ReproduceOptions, Target};
use config::{Mode, RunConfig};
use error::CliError;

/// Code construction, stopping-set analysis, dispersal planning, costs and
/// simulation for coded data-availability oracles.
#[derive(Parser)]
#[command(name = "depeg", version)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Run {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for inputs from earlier stages and for outputs.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Validity check used by `plan`.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Monte Carlo trials for `plan`, rounds for `simulate`.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build one Tanner graph per tree layer (codes/layer<j>.alist).
    Construct(Run),
    /// Enumerate small stopping sets per layer (reports/layer<j>.txt).
    Analyze(Run),
    /// Two-phase dispersal plan with validity verdicts (plan.json).
    Plan(Run),
    /// Communication cost breakdown (cost.csv).
    Cost(Run),
    /// Adversarial rounds against the plan (simulation.json, transcript.jsonl).
    Simulate(Run),
    /// Published tables and figure data from the built-in reference inputs.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        #[arg(long)]
        out: PathBuf,
        /// Monte Carlo seed for table2.
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo trials for table2.
        #[arg(long)]
        trials: Option<u64>,
        /// Node counts for fig2.
        #[arg(long, value_delimiter = ',', default_value = "5000,7500,10000,12500,15000,17500,20000,22500,25000")]
        nodes: Vec<u64>,
        /// Adversary fractions for fig2, as decimals.
        #[arg(long, value_delimiter = ',', default_value = "0.40,0.41,0.42,0.43,0.44,0.45,0.46,0.47,0.48,0.49")]
        betas: Vec<Fraction>,
    },
}

fn load(run: &Run) -> Result<RunConfig, CliError> {
    let mut c = RunConfig::load(&run.config)?;
    if let Some(s) = run.seed {
        c.seed = s;
    }
    if let Some(m) = run.mode {
        c.validity.mode = m;
    }
    c.validate()?;
    Ok(c)
}

fn stage(run: &Run, f: fn(&RunConfig, &Path) -> Result<Value, CliError>) -> Result<Value, CliError> {
    let c = load(run)?;
    f(&c, &run.out)
}

fn run(cli: Cli) -> Result<Value, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Construct(r) => stage(&r, commands::construct),
        Command::Analyze(r) => stage(&r, commands::analyze),
        Command::Plan(r) => {
            let mut c = load(&r)?;
            if let Some(t) = r.trials {
                c.validity.trials = t;
            }
            commands::plan(&c, &r.out)
        }
        Command::Cost(r) => stage(&r, commands::cost),
        Command::Simulate(r) => {
            let mut c = load(&r)?;
            if let Some(t) = r.trials {
                c.simulation.rounds = t;
            }
            commands::simulate(&c, &r.out)
        }
        Command::Reproduce { target, out, seed, trials, nodes, betas } => {
            commands::reproduce(target, &ReproduceOptions { seed, trials, nodes, betas }, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
