//! Metropolis-within-Gibbs sampler for the Poisson-lognormal exchangeable
//! model: `y_i ~ Pois(E_i theta_i)` with `theta_i = exp(alpha + v_i)`,
//! `v_i ~ N(0, sigma^2)`, a diffuse normal prior on the intercept and a
//! `Gam(0.5, 0.0005)` prior on the precision `sigma^{-2}`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use super::{default_unit_ids, seeded_rng, McmcConfig, McmcDiagnostics};
use crate::ensemble::PosteriorDrawMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonLogNormalSpec {
    pub y: Vec<u64>,
    pub expected: Vec<f64>,
    /// Variance of the zero-mean normal prior on the intercept.
    pub alpha_prior_variance: f64,
    /// `(shape, rate)` of the gamma prior on the precision `sigma^{-2}`.
    pub precision_prior: (f64, f64),
    pub mcmc: McmcConfig,
}

impl PoissonLogNormalSpec {
    /// Default hyperpriors: `alpha ~ N(0, 1e6)`,
    /// `sigma^{-2} ~ Gam(0.5, 0.0005)`.
    pub fn new(y: Vec<u64>, expected: Vec<f64>, mcmc: McmcConfig) -> Self {
        Self {
            y,
            expected,
            alpha_prior_variance: 1e6,
            precision_prior: (0.5, 0.0005),
            mcmc,
        }
    }

    fn validate(&self) -> Result<()> {
        self.mcmc.validate()?;
        if self.y.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if self.y.len() != self.expected.len() {
            return Err(Error::DimensionMismatch {
                expected: self.y.len(),
                got: self.expected.len(),
                context: "expected counts",
            });
        }
        if let Some(i) = self.expected.iter().position(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expected counts must be positive and finite, got {} at unit {}",
                self.expected[i],
                i + 1
            )));
        }
        if !(self.alpha_prior_variance > 0.0) || !(self.precision_prior.0 > 0.0) || !(self.precision_prior.1 > 0.0) {
            return Err(Error::InvalidParameter("hyperprior parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Sampler output: the relative-risk draw matrix (columns are
/// `theta_i = exp(alpha + v_i)`) plus acceptance diagnostics.
#[derive(Debug, Clone)]
pub struct PlnFit {
    pub draws: PosteriorDrawMatrix<f64>,
    pub diagnostics: McmcDiagnostics,
}

/// Full conditional of the iid random-effect precision:
/// `Gam(shape + n/2, rate + sum_i v_i^2 / 2)`.
pub fn iid_precision_full_conditional(prior: (f64, f64), v: &[f64]) -> (f64, f64) {
    let (shape0, rate0) = prior;
    let ss: f64 = v.iter().map(|&x| x * x).sum();
    (shape0 + v.len() as f64 / 2.0, rate0 + ss / 2.0)
}

pub fn pln_mcmc(spec: &PoissonLogNormalSpec) -> Result<PlnFit> {
    spec.validate()?;
    let n = spec.y.len();
    let y: Vec<f64> = spec.y.iter().map(|&c| c as f64).collect();
    let y_total: f64 = y.iter().sum();
    let e_total: f64 = spec.expected.iter().sum();

    // start at the stabilized MLE decomposition
    let mut alpha = (y_total.max(0.5) / e_total).ln();
    let mut v: Vec<f64> = y
        .iter()
        .zip(&spec.expected)
        .map(|(&yi, &ei)| ((yi + 0.5) / (ei * alpha.exp())).ln())
        .collect();
    let mut precision = {
        let var = crate::scalar::population_variance(&v);
        1.0 / var.max(1e-4)
    };

    let mut rng = seeded_rng(spec.mcmc.seed, 0);
    let step = Normal::new(0.0, spec.mcmc.proposal_sd).expect("validated proposal sd");
    // the intercept's conditional tightens like 1/sqrt(n); scale its block
    // step accordingly so one proposal_sd serves all sizes
    let alpha_step = Normal::new(0.0, spec.mcmc.proposal_sd / (n as f64).sqrt()).unwrap();

    let kept = spec.mcmc.kept();
    let mut draws = Vec::with_capacity(kept * n);
    let mut accept_v = 0usize;
    let mut accept_alpha = 0usize;

    for sweep in 0..spec.mcmc.iters {
        // per-unit random walk on v_i (log scale)
        for i in 0..n {
            let cur = v[i];
            let prop = cur + step.sample(&mut rng);
            let delta = y[i] * (prop - cur)
                - spec.expected[i] * ((alpha + prop).exp() - (alpha + cur).exp())
                - 0.5 * precision * (prop * prop - cur * cur);
            if accept(&mut rng, delta) {
                v[i] = prop;
                accept_v += 1;
            }
        }

        // random walk on the intercept against likelihood and normal prior
        let sum_ev: f64 = v
            .iter()
            .zip(&spec.expected)
            .map(|(&vi, &ei)| ei * vi.exp())
            .sum();
        let prop = alpha + alpha_step.sample(&mut rng);
        let delta = y_total * (prop - alpha) - (prop.exp() - alpha.exp()) * sum_ev
            - 0.5 * (prop * prop - alpha * alpha) / spec.alpha_prior_variance;
        if accept(&mut rng, delta) {
            alpha = prop;
            accept_alpha += 1;
        }

        // exact Gibbs for the precision
        let (shape, rate) = iid_precision_full_conditional(spec.precision_prior, &v);
        precision = Gamma::new(shape, 1.0 / rate)
            .expect("positive shape and rate")
            .sample(&mut rng);

        if sweep >= spec.mcmc.burnin {
            for &vi in &v {
                draws.push((alpha + vi).exp());
            }
        }
    }

    let total_v = spec.mcmc.iters * n;
    Ok(PlnFit {
        draws: PosteriorDrawMatrix::new(draws, kept, n, default_unit_ids(n))?,
        diagnostics: McmcDiagnostics {
            accept_v: accept_v as f64 / total_v as f64,
            accept_alpha: accept_alpha as f64 / spec.mcmc.iters as f64,
            accept_u: None,
            max_abs_u_sum: None,
        },
    })
}

pub(crate) fn accept<R: Rng>(rng: &mut R, log_ratio: f64) -> bool {
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}
