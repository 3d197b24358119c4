//! Parsing and evaluation of estimator-rule lists shared by the estimate,
//! classify and regret commands.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ed_core::estimators::{
    cb_estimate, gr_estimate, mle_passthrough, posterior_quantile_estimate, ssel_estimate,
    wrsel_estimate, EnsembleEstimate,
};
use ed_core::PosteriorDrawMatrix;

use crate::io::read_ensemble;
use crate::Invalid;

/// One requested estimator. `Ropq`/`Dopq` are scalar posterior summaries
/// that only make sense as QR-SEL/IQR-SEL candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleSpec {
    Mle,
    Ssel,
    Med,
    Quant(f64),
    Wrsel,
    Cb,
    Gr,
    Ropq,
    Dopq,
}

impl RuleSpec {
    pub fn file_stem(&self) -> String {
        match self {
            RuleSpec::Mle => "mle".into(),
            RuleSpec::Ssel => "ssel".into(),
            RuleSpec::Med => "med".into(),
            RuleSpec::Quant(q) => format!("quant_{q}"),
            RuleSpec::Wrsel => "wrsel".into(),
            RuleSpec::Cb => "cb".into(),
            RuleSpec::Gr => "gr".into(),
            RuleSpec::Ropq => "ropq".into(),
            RuleSpec::Dopq => "dopq".into(),
        }
    }
}

pub fn parse_rules(spec: &str) -> Result<Vec<RuleSpec>> {
    spec.split(',')
        .map(|token| {
            let token = token.trim().to_ascii_lowercase();
            Ok(match token.as_str() {
                "mle" => RuleSpec::Mle,
                "ssel" | "mean" => RuleSpec::Ssel,
                "med" | "median" => RuleSpec::Med,
                "wrsel" => RuleSpec::Wrsel,
                "cb" => RuleSpec::Cb,
                "gr" => RuleSpec::Gr,
                "ropq" => RuleSpec::Ropq,
                "dopq" => RuleSpec::Dopq,
                other => {
                    if let Some(q) = other.strip_prefix("quant:") {
                        let q: f64 = q.parse().map_err(|_| {
                            Invalid(format!("bad quantile in rule `{other}`"))
                        })?;
                        RuleSpec::Quant(q)
                    } else {
                        return Err(Invalid(format!(
                            "unknown rule `{other}` (expected mle, ssel, med, quant:q, wrsel, cb, gr, ropq, dopq)"
                        ))
                        .into());
                    }
                }
            })
        })
        .collect()
}

/// Options needed to materialize rule lists into concrete ensembles.
pub struct RuleContext<'a> {
    pub wrsel_a1: f64,
    pub wrsel_a2: f64,
    pub mle_path: Option<&'a PathBuf>,
}

impl RuleContext<'_> {
    /// Computes the ensemble of point estimates for one rule. `Ropq`/`Dopq`
    /// have no per-unit ensemble and are rejected here.
    pub fn ensemble(
        &self,
        rule: RuleSpec,
        draws: &PosteriorDrawMatrix<f64>,
    ) -> Result<EnsembleEstimate<f64>> {
        Ok(match rule {
            RuleSpec::Ssel => ssel_estimate(draws),
            RuleSpec::Med => posterior_quantile_estimate(draws, 0.5)?,
            RuleSpec::Quant(q) => posterior_quantile_estimate(draws, q)?,
            RuleSpec::Wrsel => wrsel_estimate(draws, self.wrsel_a1, self.wrsel_a2)?,
            RuleSpec::Cb => cb_estimate(draws)?,
            RuleSpec::Gr => gr_estimate(draws)?,
            RuleSpec::Mle => {
                let path = self.mle_path.ok_or_else(|| {
                    Invalid("rule `mle` needs --mle pointing at an ensemble CSV".into())
                })?;
                let ensemble = read_mle(path, draws)?;
                mle_passthrough(ensemble, draws)?
            }
            RuleSpec::Ropq | RuleSpec::Dopq => {
                return Err(Invalid(format!(
                    "rule `{}` is a scalar posterior summary, valid only as a QR-SEL/IQR-SEL candidate",
                    rule.file_stem()
                ))
                .into());
            }
        })
    }
}

fn read_mle(path: &Path, draws: &PosteriorDrawMatrix<f64>) -> Result<ed_core::Ensemble<f64>> {
    let (units, ensemble) =
        read_ensemble(path).with_context(|| format!("reading MLE file {}", path.display()))?;
    if units != draws.unit_ids() {
        return Err(Invalid(format!(
            "{}: unit ids do not match the draw matrix",
            path.display()
        ))
        .into());
    }
    Ok(ensemble)
}
