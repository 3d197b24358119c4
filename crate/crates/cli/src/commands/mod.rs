pub mod classify;
pub mod estimate;
pub mod fit;
pub mod regret;
pub mod report;
pub mod simulate;

use anyhow::Result;
use serde::de::DeserializeOwned;
use std::path::Path;

use crate::Invalid;

/// Loads a command's JSON parameter bag. Unknown keys are rejected by the
/// per-command config types (`deny_unknown_fields`); flags override whatever
/// the file provides.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let contents = std::fs::read_to_string(p)
                .map_err(|e| Invalid(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&contents)
                .map_err(|e| Invalid(format!("{}: {e}", p.display())).into())
        }
    }
}

/// Flag-over-config resolution.
pub fn resolve<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

pub fn require<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T> {
    flag.or(config)
        .ok_or_else(|| Invalid(format!("missing required parameter `{name}`")).into())
}

/// Threshold resolution for the classification commands: an explicit `c`
/// wins; otherwise the harness convention `C = mean + sd` of the true
/// ensemble read from `truth`.
pub fn resolve_threshold(
    c: Option<f64>,
    truth: Option<std::path::PathBuf>,
) -> Result<f64> {
    if let Some(c) = c {
        return Ok(c);
    }
    let path = truth.ok_or_else(|| Invalid("provide --c or --truth".to_string()))?;
    let (_, ensemble) = crate::io::read_ensemble(&path)?;
    Ok(ensemble.mean() + ensemble.sd())
}
