//! `ed estimate` — point-estimate ensembles from a draw matrix.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Deserialize;

use crate::commands::{load_config, require, resolve};
use crate::io::{read_draws, write_ensemble};
use crate::rules::{parse_rules, RuleContext};

#[derive(Args)]
pub struct EstimateArgs {
    /// JSON parameter bag; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Draw-matrix CSV
    #[arg(long)]
    draws: Option<PathBuf>,
    /// Comma-separated rules: ssel,med,quant:q,wrsel,cb,gr,mle
    #[arg(long)]
    rules: Option<String>,
    /// MLE ensemble CSV (required when rules include mle)
    #[arg(long)]
    mle: Option<PathBuf>,
    /// WRSEL rank-weight parameters
    #[arg(long)]
    wrsel_a1: Option<f64>,
    #[arg(long)]
    wrsel_a2: Option<f64>,
    /// Output directory (one CSV per rule)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    draws: Option<PathBuf>,
    rules: Option<String>,
    mle: Option<PathBuf>,
    wrsel_a1: Option<f64>,
    wrsel_a2: Option<f64>,
    out: Option<PathBuf>,
}

pub fn run(args: EstimateArgs) -> Result<()> {
    let cfg: EstimateConfig = load_config(args.config.as_deref())?;
    let draws_path = require(args.draws, cfg.draws, "draws")?;
    let out = require(args.out, cfg.out, "out")?;
    let rules = parse_rules(&resolve(args.rules, cfg.rules, "ssel,med,cb,gr".into()))?;
    let mle_path = args.mle.or(cfg.mle);
    let ctx = RuleContext {
        wrsel_a1: resolve(args.wrsel_a1, cfg.wrsel_a1, 0.1),
        wrsel_a2: resolve(args.wrsel_a2, cfg.wrsel_a2, 0.1),
        mle_path: mle_path.as_ref(),
    };

    let draws = read_draws(&draws_path)?;
    for rule in rules {
        let est = ctx.ensemble(rule, &draws)?;
        let path = out.join(format!("{}.csv", rule.file_stem()));
        write_ensemble(&path, "value", draws.unit_ids(), est.values())?;
        println!("{} -> {}", est.rule(), path.display());
    }
    Ok(())
}
