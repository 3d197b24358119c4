//! `ed simulate` — synthetic dataset generation.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use ed_core::simulation::{
    cl_for_rls, default_expected_counts, gen_nonspatial, gen_spatial, lattice_centroids,
    lattice_graph, CountModel, NonSpatialModel, NonSpatialScenario, SimulatedDataset, SpatialKind,
    SpatialScenario, VariabilityLevel, LATTICE_SPACING,
};

use crate::commands::{load_config, require, resolve};
use crate::io::{read_adjacency, read_centroids, read_ensemble, write_atomic, write_counts, write_ensemble};
use crate::Invalid;

#[derive(Args)]
pub struct SimulateArgs {
    /// JSON parameter bag; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// nn | gig | sc1 | sc2 | sc3 | sc4
    #[arg(long)]
    scenario: Option<String>,
    /// Ensemble size (non-spatial scenarios)
    #[arg(long)]
    n: Option<usize>,
    /// Target ratio of largest to smallest sampling variance: 1, 20 or 100
    #[arg(long)]
    rls: Option<u32>,
    /// Log-uniform half-width (overrides --rls)
    #[arg(long)]
    c_l: Option<f64>,
    /// Risk variability: low | med | high (spatial scenarios)
    #[arg(long)]
    level: Option<String>,
    /// Expected-count scaling factor (spatial scenarios)
    #[arg(long)]
    sf: Option<f64>,
    /// Side length of the shipped lattice map
    #[arg(long)]
    lattice_k: Option<usize>,
    /// multinomial | poisson (default: multinomial at SF=1, Poisson otherwise)
    #[arg(long)]
    count_model: Option<String>,
    /// Adjacency file replacing the shipped lattice
    #[arg(long)]
    adjacency: Option<PathBuf>,
    /// Expected-count CSV (unit,value) replacing the synthetic counts
    #[arg(long)]
    expected: Option<PathBuf>,
    /// Centroid CSV (unit,x,y); required for sc3 with --adjacency
    #[arg(long)]
    centroids: Option<PathBuf>,
    /// Covariate CSV (unit,value) for sc4
    #[arg(long)]
    covariate: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    scenario: Option<String>,
    n: Option<usize>,
    rls: Option<u32>,
    c_l: Option<f64>,
    level: Option<String>,
    sf: Option<f64>,
    lattice_k: Option<usize>,
    count_model: Option<String>,
    adjacency: Option<PathBuf>,
    expected: Option<PathBuf>,
    centroids: Option<PathBuf>,
    covariate: Option<PathBuf>,
    reps: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let cfg: SimulateConfig = load_config(args.config.as_deref())?;
    let scenario = require(args.scenario, cfg.scenario, "scenario")?.to_ascii_lowercase();
    let out = require(args.out, cfg.out, "out")?;
    let seed = resolve(args.seed, cfg.seed, 0);
    let reps = resolve(args.reps, cfg.reps, 1);
    if reps == 0 {
        return Err(Invalid("--reps must be at least 1".into()).into());
    }

    match scenario.as_str() {
        "nn" | "gig" => {
            let model = if scenario == "nn" {
                NonSpatialModel::NormalNormal
            } else {
                NonSpatialModel::GammaInvGamma
            };
            let c_l = match args.c_l.or(cfg.c_l) {
                Some(v) => v,
                None => cl_for_rls(resolve(args.rls, cfg.rls, 1))?,
            };
            let sc = NonSpatialScenario {
                model,
                n: require(args.n, cfg.n, "n")?,
                c_l,
                replicates: reps,
                seed,
            };
            let datasets = gen_nonspatial(&sc)?;
            datasets
                .par_iter()
                .try_for_each(|ds| write_dataset(&out, &scenario, ds))?;
            println!("wrote {} {scenario} dataset(s) to {}", datasets.len(), out.display());
        }
        "sc1" | "sc2" | "sc3" | "sc4" => {
            let kind = match scenario.as_str() {
                "sc1" => SpatialKind::Sc1,
                "sc2" => SpatialKind::Sc2,
                "sc3" => SpatialKind::Sc3,
                _ => SpatialKind::Sc4,
            };
            let level = match resolve(args.level, cfg.level, "med".into()).to_ascii_lowercase().as_str() {
                "low" => VariabilityLevel::Low,
                "med" | "medium" => VariabilityLevel::Med,
                "high" => VariabilityLevel::High,
                other => return Err(Invalid(format!("unknown level `{other}`")).into()),
            };
            let sf = resolve(args.sf, cfg.sf, 1.0);

            let (graph, centroids) = match args.adjacency.or(cfg.adjacency) {
                Some(path) => {
                    let graph = read_adjacency(&path)?;
                    let centroids = match args.centroids.or(cfg.centroids) {
                        Some(cpath) => read_centroids(&cpath)?,
                        None => {
                            if kind == SpatialKind::Sc3 {
                                return Err(Invalid(
                                    "sc3 with --adjacency needs --centroids for the covariance"
                                        .into(),
                                )
                                .into());
                            }
                            vec![(0.0, 0.0); graph.n()]
                        }
                    };
                    (graph, centroids)
                }
                None => {
                    let k = resolve(args.lattice_k, cfg.lattice_k, 12);
                    (lattice_graph(k)?, lattice_centroids(k, LATTICE_SPACING))
                }
            };
            let expected = match args.expected.or(cfg.expected) {
                Some(path) => read_ensemble(&path)?.1.into_values(),
                None => default_expected_counts(graph.n(), seed),
            };
            let covariate = match args.covariate.or(cfg.covariate) {
                Some(path) => Some(read_ensemble(&path)?.1.into_values()),
                None => None,
            };
            let count_model = match args.count_model.or(cfg.count_model) {
                None => None,
                Some(s) => Some(match s.to_ascii_lowercase().as_str() {
                    "multinomial" => CountModel::Multinomial,
                    "poisson" => CountModel::Poisson,
                    other => return Err(Invalid(format!("unknown count model `{other}`")).into()),
                }),
            };

            let datasets: Vec<SimulatedDataset> = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let mut sc = SpatialScenario::new(
                        kind,
                        level,
                        sf,
                        graph.clone(),
                        centroids.clone(),
                        expected.clone(),
                        seed + r as u64,
                    );
                    sc.covariate = covariate.clone();
                    sc.count_model = count_model;
                    let mut ds = gen_spatial(&sc)?;
                    ds.provenance.replicate = r as u64;
                    Ok(ds)
                })
                .collect::<Result<_>>()?;
            datasets
                .par_iter()
                .try_for_each(|ds| write_dataset(&out, &scenario, ds))?;
            println!("wrote {reps} {scenario} dataset(s) to {}", out.display());
        }
        other => {
            return Err(Invalid(format!(
                "unknown scenario `{other}` (expected nn, gig, sc1, sc2, sc3, sc4)"
            ))
            .into())
        }
    }
    Ok(())
}

fn write_dataset(out: &std::path::Path, scenario: &str, ds: &SimulatedDataset) -> Result<()> {
    let stem = format!("{scenario}_rep{}", ds.provenance.replicate);
    let units: Vec<String> = (1..=ds.y.len()).map(|i| i.to_string()).collect();
    write_counts(&out.join(format!("{stem}.counts.csv")), &units, &ds.y, &ds.scale)
        .context("writing counts")?;
    write_ensemble(
        &out.join(format!("{stem}.truth.csv")),
        "theta",
        &units,
        ds.theta_true.values(),
    )
    .context("writing truth")?;
    let meta = json!({
        "label": ds.provenance.label,
        "seed": ds.provenance.seed,
        "replicate": ds.provenance.replicate,
        "n": ds.y.len(),
    });
    write_atomic(
        &out.join(format!("{stem}.meta.json")),
        &serde_json::to_string_pretty(&meta)?,
    )
}
