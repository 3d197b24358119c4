//! Posterior draw generation: exact samplers for the two conjugate models,
//! Metropolis-within-Gibbs for the Poisson-lognormal and BYM convolution
//! models, and maximum-likelihood extraction.

mod bym;
pub(crate) mod conjugate;
mod graph;
mod pln;

pub use bym::{bym_mcmc, car_precision_full_conditional, car_prior_sample, BymFit, BymSpec};
pub use conjugate::{gig_posterior_draws, nn_posterior_draws, GammaInvGammaSpec, NormalNormalSpec};
pub use graph::AdjacencyGraph;
pub use pln::{iid_precision_full_conditional, pln_mcmc, PlnFit, PoissonLogNormalSpec};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

/// Deterministic RNG for a (seed, stream) pair. Replicates and chains take
/// distinct streams so they can run concurrently without sharing state.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Shared MCMC run configuration. `iters` counts total sweeps; the first
/// `burnin` are discarded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcConfig {
    pub iters: usize,
    pub burnin: usize,
    pub proposal_sd: f64,
    pub seed: u64,
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iters <= self.burnin {
            return Err(Error::InvalidParameter(format!(
                "MCMC needs iters > burnin, got {} <= {}",
                self.iters, self.burnin
            )));
        }
        if !(self.proposal_sd > 0.0 && self.proposal_sd.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "proposal_sd must be positive, got {}",
                self.proposal_sd
            )));
        }
        Ok(())
    }

    pub fn kept(&self) -> usize {
        self.iters - self.burnin
    }
}

/// Acceptance-rate and constraint diagnostics of an MCMC run.
#[derive(Debug, Clone, Copy, Default)]
pub struct McmcDiagnostics {
    pub accept_v: f64,
    pub accept_alpha: f64,
    pub accept_u: Option<f64>,
    /// Largest absolute sum of the spatial effects seen after any recentring
    /// sweep; zero when the sum-to-zero constraint held exactly throughout.
    pub max_abs_u_sum: Option<f64>,
}

/// Which likelihood the MLE extraction refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MleKind {
    /// Gaussian observation: the MLE is `y` itself.
    NormalNormal,
    /// Gamma observation with known shape `a`: the MLE is `y / a`.
    GammaInvGamma,
    /// Poisson counts with expected counts `E`: the MLE is the SMR `y / E`.
    Poisson,
}

/// Per-model maximum-likelihood ensemble. `scale` carries the shapes `a` for
/// the Gamma model or the expected counts `E` for Poisson models, and is
/// ignored for the Gaussian model.
pub fn model_mle(kind: MleKind, y: &[f64], scale: Option<&[f64]>) -> Result<Ensemble<f64>> {
    let values = match kind {
        MleKind::NormalNormal => y.to_vec(),
        MleKind::GammaInvGamma | MleKind::Poisson => {
            let s = scale.ok_or_else(|| {
                Error::InvalidParameter("this model's MLE needs a scale vector".into())
            })?;
            if s.len() != y.len() {
                return Err(Error::DimensionMismatch {
                    expected: y.len(),
                    got: s.len(),
                    context: "MLE scale vector",
                });
            }
            if let Some(i) = s.iter().position(|&v| v <= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "MLE denominator must be positive, got {} at unit {}",
                    s[i],
                    i + 1
                )));
            }
            y.iter().zip(s).map(|(&yi, &si)| yi / si).collect()
        }
    };
    Ensemble::new(values)
}

pub(crate) fn default_unit_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}
