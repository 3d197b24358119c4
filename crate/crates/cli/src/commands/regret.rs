//! `ed regret` — posterior expected loss of plug-in candidates and their
//! regret against the optimal estimator.

use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Args;
use serde::Deserialize;

use ed_core::classification::{rcl_regret, tcl_regret, RankRule, ThresholdRule};
use ed_core::dispersion::{
    dopq, iqrsel_regret, iqrsel_regret_of_value, qrsel_regret, qrsel_regret_of_value, qsel_regret,
    ropq, LossReport, QselSpec,
};
use ed_core::{EstimatorRule, PosteriorDrawMatrix};

use crate::commands::report::{write_report, ReportRow};
use crate::commands::{load_config, require, resolve, resolve_threshold};
use crate::io::read_draws;
use crate::rules::{parse_rules, RuleContext, RuleSpec};
use crate::Invalid;

#[derive(Args)]
pub struct RegretArgs {
    /// JSON parameter bag; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// qsel | qrsel | iqrsel | tcl | rcl
    #[arg(long)]
    loss: Option<String>,
    /// Draw-matrix CSV
    #[arg(long)]
    draws: Option<PathBuf>,
    /// Comma-separated candidates (ssel,med,quant:q,wrsel,cb,gr,mle,ropq,dopq)
    #[arg(long)]
    candidates: Option<String>,
    /// MLE ensemble CSV (required when candidates include mle)
    #[arg(long)]
    mle: Option<PathBuf>,
    /// Q-SEL probabilities, comma separated
    #[arg(long)]
    p: Option<String>,
    /// Threshold on the parameter scale (tcl)
    #[arg(long)]
    c: Option<f64>,
    /// Truth CSV (unit,theta); used when --c is absent to set the harness
    /// threshold C = mean + sd of the true ensemble
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Extra candidate ensembles to score, as name=path (repeatable)
    #[arg(long)]
    extra: Vec<String>,
    /// False-positive weight in (0,1); omitted = unweighted (tcl)
    #[arg(long)]
    p_weight: Option<f64>,
    /// Swap the positive class to `below the cut-off` (tcl)
    #[arg(long, default_value_t = false)]
    inverted: bool,
    /// Percentile-rank cut-off (rcl)
    #[arg(long)]
    gamma: Option<f64>,
    /// Score the dispersion losses on the log scale
    #[arg(long, default_value_t = false)]
    log_scale: bool,
    #[arg(long)]
    wrsel_a1: Option<f64>,
    #[arg(long)]
    wrsel_a2: Option<f64>,
    /// Scenario label stamped into the report rows
    #[arg(long)]
    scenario: Option<String>,
    /// Model label stamped into the report rows
    #[arg(long)]
    model: Option<String>,
    /// Output stem: writes `<out>.csv` and `<out>.json`
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RegretConfig {
    loss: Option<String>,
    draws: Option<PathBuf>,
    candidates: Option<String>,
    mle: Option<PathBuf>,
    p: Option<String>,
    c: Option<f64>,
    truth: Option<PathBuf>,
    extra: Option<Vec<String>>,
    p_weight: Option<f64>,
    inverted: Option<bool>,
    gamma: Option<f64>,
    log_scale: Option<bool>,
    wrsel_a1: Option<f64>,
    wrsel_a2: Option<f64>,
    scenario: Option<String>,
    model: Option<String>,
    out: Option<PathBuf>,
}

pub fn run(args: RegretArgs) -> Result<()> {
    let cfg: RegretConfig = load_config(args.config.as_deref())?;
    let loss = require(args.loss, cfg.loss, "loss")?.to_ascii_lowercase();
    let draws_path = require(args.draws, cfg.draws, "draws")?;
    let out = require(args.out, cfg.out, "out")?;
    let candidates = parse_rules(&resolve(
        args.candidates,
        cfg.candidates,
        "ssel,med,cb,gr".into(),
    ))?;
    let mle_path = args.mle.or(cfg.mle);
    let ctx = RuleContext {
        wrsel_a1: resolve(args.wrsel_a1, cfg.wrsel_a1, 0.1),
        wrsel_a2: resolve(args.wrsel_a2, cfg.wrsel_a2, 0.1),
        mle_path: mle_path.as_ref(),
    };
    let scenario = resolve(args.scenario, cfg.scenario, "-".into());
    let model = resolve(args.model, cfg.model, "-".into());
    let log_scale = args.log_scale || cfg.log_scale.unwrap_or(false);

    let mut draws = read_draws(&draws_path)?;
    if log_scale {
        if !matches!(loss.as_str(), "qsel" | "iqrsel") {
            return Err(Invalid(
                "--log-scale applies to qsel and iqrsel (the log of a quartile ratio is already an IQR)".into(),
            )
            .into());
        }
        draws = draws.map(f64::ln)?;
    }

    enum LossKind {
        Qsel(QselSpec<f64>),
        Qrsel,
        Iqrsel,
        Tcl(ThresholdRule<f64>),
        Rcl(RankRule<f64>),
    }

    let kind = match loss.as_str() {
        "qsel" => LossKind::Qsel(parse_probs(args.p.or(cfg.p))?),
        "qrsel" => LossKind::Qrsel,
        "iqrsel" => LossKind::Iqrsel,
        "tcl" => {
            let c = resolve_threshold(args.c.or(cfg.c), args.truth.or(cfg.truth))?;
            let inverted = args.inverted || cfg.inverted.unwrap_or(false);
            let rule = match args.p_weight.or(cfg.p_weight) {
                Some(p) => ThresholdRule::weighted(c, p)?,
                None => ThresholdRule::unweighted(c),
            }
            .inverted(inverted);
            LossKind::Tcl(rule)
        }
        "rcl" => LossKind::Rcl(RankRule::new(resolve(args.gamma, cfg.gamma, 0.8))?),
        other => {
            return Err(Invalid(format!(
                "unknown loss `{other}` (expected qsel, qrsel, iqrsel, tcl, rcl)"
            ))
            .into())
        }
    };

    let score = |est: &ed_core::EnsembleEstimate<f64>| -> Result<LossReport<f64>> {
        Ok(match &kind {
            LossKind::Qsel(spec) => qsel_regret(&draws, spec, est)?,
            LossKind::Qrsel => qrsel_regret(&draws, est)?,
            LossKind::Iqrsel => iqrsel_regret(&draws, est)?,
            LossKind::Tcl(rule) => tcl_regret(&draws, rule, est)?,
            LossKind::Rcl(rule) => rcl_regret(&draws, rule, est)?,
        })
    };

    let mut reports: Vec<(String, LossReport<f64>)> = Vec::new();

    // the optimal estimator's own row: regret identically zero
    let mut optimal_report = match &kind {
        LossKind::Qsel(spec) => {
            let opt = ed_core::dispersion::optimal_qsel_estimator(&draws, spec);
            ed_core::dispersion::qsel_regret_of_values(&draws, spec, &opt.values, EstimatorRule::Ssel)?
        }
        LossKind::Qrsel => {
            let opt = ed_core::dispersion::optimal_qr(&draws)?;
            qrsel_regret_of_value(&draws, opt, EstimatorRule::Ssel)?
        }
        LossKind::Iqrsel => {
            let opt = ed_core::dispersion::optimal_iqr(&draws);
            iqrsel_regret_of_value(&draws, opt, EstimatorRule::Ssel)?
        }
        LossKind::Tcl(rule) => {
            let opt = ed_core::classification::optimal_tcl(&draws, rule)?;
            tcl_regret(&draws, rule, &opt)?
        }
        LossKind::Rcl(rule) => {
            let opt = ed_core::classification::optimal_rcl(&draws, rule);
            let probs = ed_core::classification::ClassificationProbabilities::rank(&draws, rule);
            let loss_value = ed_core::classification::posterior_expected_rcl_with(
                &probs,
                rule,
                opt.percentiles(),
            )?;
            LossReport {
                loss_name: format!("RCL(gamma={})", rule.gamma()),
                optimal_loss: loss_value,
                candidate_loss: loss_value,
                regret: 0.0,
                percent_regret: 0.0,
                rule: EstimatorRule::Median,
            }
        }
    };
    optimal_report.regret = 0.0;
    optimal_report.percent_regret = 0.0;
    reports.push(("optimal".into(), optimal_report));

    for &spec_rule in &candidates {
        let rep = match (spec_rule, &kind) {
            (RuleSpec::Ropq, LossKind::Qrsel) => {
                qrsel_regret_of_value(&draws, ropq(&draws)?, EstimatorRule::Ssel)?
            }
            (RuleSpec::Dopq, LossKind::Iqrsel) => {
                iqrsel_regret_of_value(&draws, dopq(&draws), EstimatorRule::Ssel)?
            }
            (RuleSpec::Ropq, _) => {
                return Err(Invalid("ropq is only a QR-SEL candidate; use --loss qrsel".into()).into())
            }
            (RuleSpec::Dopq, _) => {
                return Err(Invalid("dopq is only an IQR-SEL candidate; use --loss iqrsel".into()).into())
            }
            _ => {
                let est = candidate_ensemble(&ctx, spec_rule, &draws, log_scale)?;
                score(&est)?
            }
        };
        reports.push((spec_rule.file_stem(), rep));
    }

    // user-supplied candidate ensembles: name=path
    let extras: Vec<String> = if args.extra.is_empty() {
        cfg.extra.unwrap_or_default()
    } else {
        args.extra.clone()
    };
    for entry in &extras {
        let (name, path) = entry
            .split_once('=')
            .ok_or_else(|| Invalid(format!("--extra expects name=path, got `{entry}`")))?;
        let (units, ensemble) = crate::io::read_ensemble(Path::new(path))?;
        if units != draws.unit_ids() {
            return Err(Invalid(format!("{path}: unit ids do not match the draw matrix")).into());
        }
        let ensemble = if log_scale { ensemble.map(f64::ln)? } else { ensemble };
        let est = ed_core::estimators::mle_passthrough(ensemble, &draws)?;
        reports.push((name.to_string(), score(&est)?));
    }

    let rows: Vec<ReportRow> = reports
        .into_iter()
        .map(|(name, rep)| ReportRow {
            scenario: scenario.clone(),
            model: model.clone(),
            loss: rep.loss_name.clone(),
            estimator: name,
            optimal_loss: rep.optimal_loss,
            candidate_loss: rep.candidate_loss,
            regret: rep.regret,
            percent_regret: rep.percent_regret,
        })
        .collect();
    write_report(&out, &rows)?;
    for row in &rows {
        println!(
            "{}: loss {} regret {} ({}%)",
            row.estimator, row.candidate_loss, row.regret, row.percent_regret
        );
    }
    Ok(())
}

fn candidate_ensemble(
    ctx: &RuleContext<'_>,
    rule: RuleSpec,
    draws: &PosteriorDrawMatrix<f64>,
    log_scale: bool,
) -> Result<ed_core::EnsembleEstimate<f64>> {
    if log_scale && rule == RuleSpec::Mle {
        // MLE files live on the natural scale; move them onto the scored scale
        let est = ctx.ensemble(rule, draws)?;
        let mapped = est.ensemble().map(f64::ln)?;
        return Ok(ed_core::EnsembleEstimate::new(mapped, est.rule()));
    }
    ctx.ensemble(rule, draws)
}

fn parse_probs(p: Option<String>) -> Result<QselSpec<f64>> {
    match p {
        None => Ok(QselSpec::quartiles()),
        Some(spec) => {
            let probs: Vec<f64> = spec
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Invalid(format!("bad probability `{t}`")).into())
                })
                .collect::<Result<_>>()?;
            Ok(QselSpec::new(probs)?)
        }
    }
}
