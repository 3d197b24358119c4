//! `ed fit` — posterior draw generation for the four models.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Deserialize;
use serde_json::json;

use ed_core::models::{
    bym_mcmc, gig_posterior_draws, model_mle, nn_posterior_draws, pln_mcmc, BymSpec,
    GammaInvGammaSpec, McmcConfig, MleKind, NormalNormalSpec, PoissonLogNormalSpec,
};

use crate::commands::{load_config, require, resolve};
use crate::io::{read_adjacency, read_counts, write_atomic, write_draws, write_ensemble};
use crate::Invalid;

#[derive(Args)]
pub struct FitArgs {
    /// JSON parameter bag; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// nn | gig | pln | bym
    #[arg(long)]
    model: Option<String>,
    /// Counts CSV (unit,y,E); E holds sigma^2 for nn and the shape a for gig
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output draw-matrix CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of joint posterior draws (conjugate models)
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Prior mean (nn)
    #[arg(long)]
    mu0: Option<f64>,
    /// Prior variance (nn)
    #[arg(long)]
    tau0_sq: Option<f64>,
    /// Prior shape (gig)
    #[arg(long)]
    alpha0: Option<f64>,
    /// Prior scale (gig)
    #[arg(long)]
    beta0: Option<f64>,
    /// Total MCMC sweeps (pln/bym)
    #[arg(long)]
    iters: Option<usize>,
    /// Discarded initial sweeps (pln/bym)
    #[arg(long)]
    burnin: Option<usize>,
    /// Random-walk proposal standard deviation (pln/bym)
    #[arg(long)]
    proposal_sd: Option<f64>,
    /// Adjacency file (bym)
    #[arg(long)]
    adjacency: Option<PathBuf>,
    /// Also write the model MLE ensemble here
    #[arg(long)]
    mle_out: Option<PathBuf>,
    /// Write MCMC acceptance diagnostics here (JSON)
    #[arg(long)]
    diag_out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    model: Option<String>,
    data: Option<PathBuf>,
    out: Option<PathBuf>,
    draws: Option<usize>,
    seed: Option<u64>,
    mu0: Option<f64>,
    tau0_sq: Option<f64>,
    alpha0: Option<f64>,
    beta0: Option<f64>,
    iters: Option<usize>,
    burnin: Option<usize>,
    proposal_sd: Option<f64>,
    adjacency: Option<PathBuf>,
    mle_out: Option<PathBuf>,
    diag_out: Option<PathBuf>,
}

pub fn run(args: FitArgs) -> Result<()> {
    let cfg: FitConfig = load_config(args.config.as_deref())?;
    let model = require(args.model, cfg.model, "model")?.to_ascii_lowercase();
    let data_path = require(args.data, cfg.data, "data")?;
    let out = require(args.out, cfg.out, "out")?;
    let seed = resolve(args.seed, cfg.seed, 0);
    let data = read_counts(&data_path)?;

    let mcmc = McmcConfig {
        iters: resolve(args.iters, cfg.iters, 4000),
        burnin: resolve(args.burnin, cfg.burnin, 2000),
        proposal_sd: resolve(args.proposal_sd, cfg.proposal_sd, 0.3),
        seed,
    };

    let (draws, mle, diagnostics) = match model.as_str() {
        "nn" => {
            let spec = NormalNormalSpec {
                mu0: resolve(args.mu0, cfg.mu0, 0.0),
                tau0_sq: resolve(args.tau0_sq, cfg.tau0_sq, 1.0),
                sigma_sq: data.expected.clone(),
            };
            let s = resolve(args.draws, cfg.draws, 2000);
            let draws = nn_posterior_draws(&spec, &data.y, s, seed)?;
            let mle = model_mle(MleKind::NormalNormal, &data.y, None)?;
            (draws, mle, None)
        }
        "gig" => {
            let spec = GammaInvGammaSpec {
                alpha0: resolve(args.alpha0, cfg.alpha0, 4.0),
                beta0: resolve(args.beta0, cfg.beta0, 3.0),
                a: data.expected.clone(),
            };
            let s = resolve(args.draws, cfg.draws, 2000);
            let draws = gig_posterior_draws(&spec, &data.y, s, seed)?;
            let mle = model_mle(MleKind::GammaInvGamma, &data.y, Some(&data.expected))?;
            (draws, mle, None)
        }
        "pln" => {
            let spec = PoissonLogNormalSpec::new(data.integer_counts()?, data.expected.clone(), mcmc);
            let fit = pln_mcmc(&spec)?;
            let mle = model_mle(MleKind::Poisson, &data.y, Some(&data.expected))?;
            (fit.draws, mle, Some(fit.diagnostics))
        }
        "bym" => {
            let adjacency = require(args.adjacency, cfg.adjacency, "adjacency")?;
            let graph = read_adjacency(&adjacency)?;
            let spec = BymSpec::new(data.integer_counts()?, data.expected.clone(), graph, mcmc);
            let fit = bym_mcmc(&spec)?;
            let mle = model_mle(MleKind::Poisson, &data.y, Some(&data.expected))?;
            (fit.draws, mle, Some(fit.diagnostics))
        }
        other => {
            return Err(Invalid(format!(
                "unknown model `{other}` (expected nn, gig, pln, bym)"
            ))
            .into())
        }
    };

    let draws = draws.with_unit_ids(data.units.clone())?;
    write_draws(&out, &draws)?;
    println!(
        "wrote {} draws x {} units to {}",
        draws.n_draws(),
        draws.n_units(),
        out.display()
    );

    if let Some(diag) = diagnostics {
        eprintln!(
            "acceptance rates: v {:.3}{}{}",
            diag.accept_v,
            diag.accept_u
                .map(|u| format!(", u {u:.3}"))
                .unwrap_or_default(),
            format_args!(", alpha {:.3}", diag.accept_alpha),
        );
        if let Some(path) = args.diag_out.or(cfg.diag_out) {
            let body = json!({
                "accept_v": diag.accept_v,
                "accept_alpha": diag.accept_alpha,
                "accept_u": diag.accept_u,
                "max_abs_u_sum": diag.max_abs_u_sum,
            });
            write_atomic(&path, &serde_json::to_string_pretty(&body)?)?;
        }
    }

    if let Some(path) = args.mle_out.or(cfg.mle_out) {
        write_ensemble(&path, "value", &data.units, mle.values())?;
    }
    Ok(())
}
