//! `ed` — posterior ensemble decisions: simulate, fit, estimate, classify,
//! regret, report.
//!
//! Exit codes: 0 success, 2 validation error (bad flags, malformed files,
//! inconsistent dimensions), 3 numerical error (degenerate or ill-posed
//! computations).

mod commands;
mod io;
mod rules;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Validation failure raised by the CLI layer (maps to exit code 2).
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Parser)]
#[command(
    name = "ed",
    about = "Optimal point-estimate ensembles and posterior regret for hierarchical models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic datasets (non-spatial nn/gig designs, spatial SC1-SC4)
    Simulate(commands::simulate::SimulateArgs),
    /// Draw from a model posterior: exact conjugate samplers or MCMC
    Fit(commands::fit::FitArgs),
    /// Produce point-estimate ensembles from a draw matrix
    Estimate(commands::estimate::EstimateArgs),
    /// Threshold/rank classification with posterior TPR/TNR
    Classify(commands::classify::ClassifyArgs),
    /// Posterior expected loss and regret of plug-in candidates
    Regret(commands::regret::RegretArgs),
    /// Merge regret reports into a combined table
    Report(commands::report::ReportArgs),
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Invalid>().is_some() {
            return 2;
        }
        if let Some(core) = cause.downcast_ref::<ed_core::Error>() {
            return if core.is_validation() { 2 } else { 3 };
        }
        if cause.downcast_ref::<csv::Error>().is_some()
            || cause.downcast_ref::<serde_json::Error>().is_some()
        {
            return 2;
        }
    }
    3
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("ED_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Fit(args) => commands::fit::run(args),
        Command::Estimate(args) => commands::estimate::run(args),
        Command::Classify(args) => commands::classify::run(args),
        Command::Regret(args) => commands::regret::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
