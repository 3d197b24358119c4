//! `ed classify` — threshold/rank allocations with posterior TPR/TNR.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Deserialize;
use serde_json::json;

use ed_core::classification::{
    optimal_rcl, optimal_tcl, rcl_bayes_rates, tcl_bayes_rates, BayesRates, RankRule,
    ThresholdRule,
};
use ed_core::Ensemble;

use crate::commands::{load_config, require, resolve, resolve_threshold};
use crate::io::{read_draws, write_atomic};
use crate::rules::{parse_rules, RuleContext};
use crate::Invalid;

#[derive(Args)]
pub struct ClassifyArgs {
    /// JSON parameter bag; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Draw-matrix CSV
    #[arg(long)]
    draws: Option<PathBuf>,
    /// tcl | rcl
    #[arg(long)]
    rule: Option<String>,
    /// Threshold on the parameter scale (tcl)
    #[arg(long)]
    c: Option<f64>,
    /// Truth CSV (unit,theta); used when --c is absent to set the harness
    /// threshold C = mean + sd of the true ensemble
    #[arg(long)]
    truth: Option<PathBuf>,
    /// False-positive weight in (0,1); omitted = unweighted (tcl)
    #[arg(long)]
    p_weight: Option<f64>,
    /// Swap the positive class to `below the cut-off` (tcl)
    #[arg(long, default_value_t = false)]
    inverted: bool,
    /// Percentile-rank cut-off in (0,1) (rcl)
    #[arg(long)]
    gamma: Option<f64>,
    /// Candidate estimators to classify with
    #[arg(long)]
    candidates: Option<String>,
    /// MLE ensemble CSV (required when candidates include mle)
    #[arg(long)]
    mle: Option<PathBuf>,
    #[arg(long)]
    wrsel_a1: Option<f64>,
    #[arg(long)]
    wrsel_a2: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    draws: Option<PathBuf>,
    rule: Option<String>,
    c: Option<f64>,
    truth: Option<PathBuf>,
    p_weight: Option<f64>,
    inverted: Option<bool>,
    gamma: Option<f64>,
    candidates: Option<String>,
    mle: Option<PathBuf>,
    wrsel_a1: Option<f64>,
    wrsel_a2: Option<f64>,
    out: Option<PathBuf>,
}

struct CandidateResult {
    name: String,
    above: Vec<bool>,
    rates: BayesRates<f64>,
}

pub fn run(args: ClassifyArgs) -> Result<()> {
    let cfg: ClassifyConfig = load_config(args.config.as_deref())?;
    let draws_path = require(args.draws, cfg.draws, "draws")?;
    let out = require(args.out, cfg.out, "out")?;
    let rule_kind = resolve(args.rule, cfg.rule, "tcl".into()).to_ascii_lowercase();
    let candidates = parse_rules(&resolve(args.candidates, cfg.candidates, "ssel,med".into()))?;
    let mle_path = args.mle.or(cfg.mle);
    let ctx = RuleContext {
        wrsel_a1: resolve(args.wrsel_a1, cfg.wrsel_a1, 0.1),
        wrsel_a2: resolve(args.wrsel_a2, cfg.wrsel_a2, 0.1),
        mle_path: mle_path.as_ref(),
    };

    let draws = read_draws(&draws_path)?;
    let mut results = Vec::new();

    match rule_kind.as_str() {
        "tcl" => {
            let c = resolve_threshold(args.c.or(cfg.c), args.truth.or(cfg.truth))?;
            let inverted = args.inverted || cfg.inverted.unwrap_or(false);
            let rule = match args.p_weight.or(cfg.p_weight) {
                Some(p) => ThresholdRule::weighted(c, p)?,
                None => ThresholdRule::unweighted(c),
            }
            .inverted(inverted);

            let optimal = optimal_tcl(&draws, &rule)?;
            results.push(CandidateResult {
                name: "optimal".into(),
                above: optimal.values().iter().map(|&v| v > c).collect(),
                rates: tcl_bayes_rates(&draws, &rule, optimal.ensemble())?,
            });
            for spec in candidates {
                let est = ctx.ensemble(spec, &draws)?;
                results.push(CandidateResult {
                    name: spec.file_stem(),
                    above: est.values().iter().map(|&v| v > c).collect(),
                    rates: tcl_bayes_rates(&draws, &rule, est.ensemble())?,
                });
            }
        }
        "rcl" => {
            let gamma = resolve(args.gamma, cfg.gamma, 0.8);
            let rule = RankRule::new(gamma)?;
            let optimal = optimal_rcl(&draws, &rule);
            results.push(CandidateResult {
                name: "optimal".into(),
                above: optimal.percentiles().iter().map(|&p| p > gamma).collect(),
                rates: rcl_bayes_rates(&draws, &rule, optimal.percentiles())?,
            });
            for spec in candidates {
                let est = ctx.ensemble(spec, &draws)?;
                let pct = Ensemble::new(est.values().to_vec())?.ranks();
                results.push(CandidateResult {
                    name: spec.file_stem(),
                    above: pct.percentiles().iter().map(|&p| p > gamma).collect(),
                    rates: rcl_bayes_rates(&draws, &rule, pct.percentiles())?,
                });
            }
        }
        other => {
            return Err(Invalid(format!("unknown rule `{other}` (expected tcl, rcl)")).into())
        }
    }

    write_outputs(&out, draws.unit_ids(), &results)?;
    for r in &results {
        println!(
            "{}: {} above, TPR {}, TNR {}",
            r.name,
            r.above.iter().filter(|&&a| a).count(),
            fmt_rate(r.rates.tpr),
            fmt_rate(r.rates.tnr),
        );
    }
    Ok(())
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "undefined".into())
}

fn write_outputs(out: &std::path::Path, units: &[String], results: &[CandidateResult]) -> Result<()> {
    let mut alloc = String::from("unit");
    for r in results {
        let _ = write!(alloc, ",{}", r.name);
    }
    alloc.push('\n');
    for (i, unit) in units.iter().enumerate() {
        let _ = write!(alloc, "{unit}");
        for r in results {
            let _ = write!(alloc, ",{}", u8::from(r.above[i]));
        }
        alloc.push('\n');
    }
    write_atomic(&out.join("allocations.csv"), &alloc)?;

    let mut rates = String::from("candidate,above,tpr,tnr\n");
    for r in results {
        let _ = writeln!(
            rates,
            "{},{},{},{}",
            r.name,
            r.above.iter().filter(|&&a| a).count(),
            r.rates.tpr.map(|v| v.to_string()).unwrap_or_default(),
            r.rates.tnr.map(|v| v.to_string()).unwrap_or_default(),
        );
    }
    write_atomic(&out.join("rates.csv"), &rates)?;

    let body: Vec<_> = results
        .iter()
        .map(|r| {
            json!({
                "candidate": r.name,
                "above": r.above.iter().filter(|&&a| a).count(),
                "tpr": r.rates.tpr,
                "tnr": r.rates.tnr,
            })
        })
        .collect();
    write_atomic(
        &out.join("rates.json"),
        &serde_json::to_string_pretty(&body)?,
    )
}
