//! `ed report` — merge regret reports into one table, CSV plus a JSON
//! mirror, rendered with the optimal posterior loss first and then
//! per-estimator regret with the percentage in parentheses.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::io::write_atomic;
use crate::Invalid;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub model: String,
    pub loss: String,
    pub estimator: String,
    pub optimal_loss: f64,
    pub candidate_loss: f64,
    pub regret: f64,
    pub percent_regret: f64,
}

/// Writes `<stem>.csv` and `<stem>.json`. The percentage column is
/// recomputed from the regret and optimal loss being written, so any report
/// file is internally consistent by construction.
pub fn write_report(stem: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut rows = rows.to_vec();
    for row in &mut rows {
        row.percent_regret = percent(row.regret, row.optimal_loss);
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        writer.serialize(r)?;
    }
    let csv = String::from_utf8(writer.into_inner()?)?;
    write_atomic(&stem.with_extension("csv"), &csv)?;
    write_atomic(
        &stem.with_extension("json"),
        &serde_json::to_string_pretty(&rows)?,
    )
}

fn percent(regret: f64, optimal: f64) -> f64 {
    if regret == 0.0 {
        0.0
    } else {
        100.0 * regret / optimal
    }
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for (idx, record) in reader.deserialize::<ReportRow>().enumerate() {
        let mut row: ReportRow =
            record.map_err(|e| Invalid(format!("{}: line {}: {e}", path.display(), idx + 2)))?;
        // enforce the bit-consistency invariant on ingest
        row.percent_regret = percent(row.regret, row.optimal_loss);
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Args)]
pub struct ReportArgs {
    /// Regret report CSVs to merge
    #[arg(long, num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    /// Output stem: writes `<out>.csv` and `<out>.json`
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: ReportArgs) -> Result<()> {
    let mut rows = Vec::new();
    for input in &args.inputs {
        rows.extend(read_report(input)?);
    }
    if rows.is_empty() {
        return Err(Invalid("no report rows found in the inputs".into()).into());
    }
    write_report(&args.out, &rows)?;
    print!("{}", render_table(&rows));
    Ok(())
}

/// One text row per (scenario, model, loss): the optimal posterior loss
/// first, then `regret (pct%)` per estimator column.
fn render_table(rows: &[ReportRow]) -> String {
    let mut estimators: Vec<String> = Vec::new();
    for r in rows {
        if r.estimator != "optimal" && !estimators.contains(&r.estimator) {
            estimators.push(r.estimator.clone());
        }
    }
    let mut groups: BTreeMap<(String, String, String), BTreeMap<String, &ReportRow>> =
        BTreeMap::new();
    for r in rows {
        groups
            .entry((r.scenario.clone(), r.model.clone(), r.loss.clone()))
            .or_default()
            .insert(r.estimator.clone(), r);
    }

    let mut header = vec![
        "scenario".to_string(),
        "model".to_string(),
        "loss".to_string(),
        "optimal".to_string(),
    ];
    header.extend(estimators.iter().cloned());

    let mut body: Vec<Vec<String>> = Vec::new();
    for ((scenario, model, loss), by_est) in &groups {
        let optimal = by_est
            .values()
            .next()
            .map(|r| format!("{:.4}", r.optimal_loss))
            .unwrap_or_default();
        let mut line = vec![scenario.clone(), model.clone(), loss.clone(), optimal];
        for est in &estimators {
            line.push(match by_est.get(est) {
                Some(r) => format!("{:.4} ({:.0}%)", r.regret, r.percent_regret),
                None => "-".into(),
            });
        }
        body.push(line);
    }

    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for line in &body {
        for (w, cell) in widths.iter_mut().zip(line) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let fmt_line = |cells: &[String], widths: &[usize]| -> String {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let _ = writeln!(out, "{}", fmt_line(&header, &widths));
    for line in &body {
        let _ = writeln!(out, "{}", fmt_line(line, &widths));
    }
    out
}
