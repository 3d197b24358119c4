//! Non-spatial synthetic data: the RLS x n factorial design over the two
//! conjugate models. True ensembles keep their prior means (0 for the
//! Gaussian model, 1 for the Gamma model) across all heterogeneity levels.

use rand_distr::{Distribution, Gamma, Normal, Uniform};

use super::{DatasetProvenance, SimulatedDataset};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::models::conjugate::sample_inverse_gamma;
use crate::models::{seeded_rng, GammaInvGammaSpec, NormalNormalSpec};

/// Hyperparameters of the Gaussian generative model (prior mean 0).
pub const NN_MU0: f64 = 0.0;
pub const NN_TAU0_SQ: f64 = 1.0;
/// Hyperparameters of the Gamma generative model (prior mean
/// `beta0 / (alpha0 - 1) = 1`).
pub const GIG_ALPHA0: f64 = 4.0;
pub const GIG_BETA0: f64 = 3.0;

/// Log-uniform half-widths targeting ratio-of-largest-to-smallest sampling
/// variances of roughly 1, 20 and 100.
pub const CL_LEVELS: [f64; 3] = [0.01, 1.5, 2.3];

/// Maps a nominal RLS level to its half-width.
pub fn cl_for_rls(rls: u32) -> Result<f64> {
    match rls {
        1 => Ok(CL_LEVELS[0]),
        20 => Ok(CL_LEVELS[1]),
        100 => Ok(CL_LEVELS[2]),
        other => Err(Error::InvalidParameter(format!(
            "supported RLS levels are 1, 20 and 100, got {other}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonSpatialModel {
    NormalNormal,
    GammaInvGamma,
}

impl std::fmt::Display for NonSpatialModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NonSpatialModel::NormalNormal => write!(f, "nn"),
            NonSpatialModel::GammaInvGamma => write!(f, "gig"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonSpatialScenario {
    pub model: NonSpatialModel,
    pub n: usize,
    /// Half-width of the log-uniform scale distribution (`C_l >= 0`).
    pub c_l: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl NonSpatialScenario {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.replicates == 0 {
            return Err(Error::InvalidParameter(
                "scenario needs n >= 1 and at least one replicate".into(),
            ));
        }
        if !(self.c_l >= 0.0) || !self.c_l.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "C_l must be non-negative, got {}",
                self.c_l
            )));
        }
        Ok(())
    }

    /// The fitting spec matching the generative model of `dataset` (the
    /// harness fits the model that produced the data).
    pub fn fit_spec(&self, dataset: &SimulatedDataset) -> FittedConjugate {
        match self.model {
            NonSpatialModel::NormalNormal => FittedConjugate::NormalNormal(NormalNormalSpec {
                mu0: NN_MU0,
                tau0_sq: NN_TAU0_SQ,
                sigma_sq: dataset.scale.clone(),
            }),
            NonSpatialModel::GammaInvGamma => FittedConjugate::GammaInvGamma(GammaInvGammaSpec {
                alpha0: GIG_ALPHA0,
                beta0: GIG_BETA0,
                a: dataset.scale.clone(),
            }),
        }
    }
}

/// The conjugate spec to fit a non-spatial dataset with.
#[derive(Debug, Clone)]
pub enum FittedConjugate {
    NormalNormal(NormalNormalSpec),
    GammaInvGamma(GammaInvGammaSpec),
}

/// Generates the replicate datasets of a non-spatial scenario. Replicate `r`
/// uses the RNG stream `(seed, r)`, so datasets replay byte-identically and
/// replicates are independent.
pub fn gen_nonspatial(sc: &NonSpatialScenario) -> Result<Vec<SimulatedDataset>> {
    sc.validate()?;
    (0..sc.replicates).map(|r| gen_replicate(sc, r as u64)).collect()
}

fn gen_replicate(sc: &NonSpatialScenario, replicate: u64) -> Result<SimulatedDataset> {
    let mut rng = seeded_rng(sc.seed, replicate);
    let log_scale = if sc.c_l == 0.0 {
        None
    } else {
        Some(Uniform::new_inclusive(-sc.c_l, sc.c_l).expect("valid range"))
    };
    let mut scale = Vec::with_capacity(sc.n);
    for _ in 0..sc.n {
        scale.push(match &log_scale {
            Some(u) => u.sample(&mut rng).exp(),
            None => 1.0,
        });
    }

    let mut theta = Vec::with_capacity(sc.n);
    let mut y = Vec::with_capacity(sc.n);
    match sc.model {
        NonSpatialModel::NormalNormal => {
            let prior = Normal::new(NN_MU0, NN_TAU0_SQ.sqrt()).unwrap();
            for &s2 in &scale {
                let t: f64 = prior.sample(&mut rng);
                let obs = Normal::new(t, s2.sqrt()).unwrap().sample(&mut rng);
                theta.push(t);
                y.push(obs);
            }
        }
        NonSpatialModel::GammaInvGamma => {
            for &a in &scale {
                let t = sample_inverse_gamma(&mut rng, GIG_ALPHA0, GIG_BETA0);
                let obs = Gamma::new(a, t).unwrap().sample(&mut rng);
                theta.push(t);
                y.push(obs);
            }
        }
    }

    Ok(SimulatedDataset {
        theta_true: Ensemble::new(theta)?,
        scale,
        y,
        provenance: DatasetProvenance {
            label: format!("{}-n{}-cl{}", sc.model, sc.n, sc.c_l),
            seed: sc.seed,
            replicate,
        },
    })
}

/// Empirical ratio of the largest to the smallest scale value.
pub fn empirical_rls(scale: &[f64]) -> f64 {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &s in scale {
        min = min.min(s);
        max = max.max(s);
    }
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_half_width_means_unit_scales() {
        let sc = NonSpatialScenario {
            model: NonSpatialModel::NormalNormal,
            n: 50,
            c_l: 0.0,
            replicates: 2,
            seed: 9,
        };
        for ds in gen_nonspatial(&sc).unwrap() {
            assert!(ds.scale.iter().all(|&s| s == 1.0));
            assert_eq!(empirical_rls(&ds.scale), 1.0);
        }
    }

    #[test]
    fn rls_lands_near_target_level() {
        // C_l = 1.5 targets RLS ~ exp(2 * 1.5) ~ 20 for large n
        let sc = NonSpatialScenario {
            model: NonSpatialModel::NormalNormal,
            n: 100,
            c_l: 1.5,
            replicates: 100,
            seed: 4,
        };
        let mean_rls: f64 = gen_nonspatial(&sc)
            .unwrap()
            .iter()
            .map(|d| empirical_rls(&d.scale))
            .sum::<f64>()
            / 100.0;
        assert!(
            (10.0..=40.0).contains(&mean_rls),
            "mean RLS {mean_rls} outside [0.5x, 2x] of 20"
        );
    }

    #[test]
    fn nn_true_ensemble_mean_near_zero() {
        let sc = NonSpatialScenario {
            model: NonSpatialModel::NormalNormal,
            n: 2000,
            c_l: 1.5,
            replicates: 1,
            seed: 21,
        };
        let ds = &gen_nonspatial(&sc).unwrap()[0];
        // theta ~ N(0, 1): MC error 4 / sqrt(n)
        assert!(ds.theta_true.mean().abs() < 4.0 / (2000f64).sqrt());
    }

    #[test]
    fn gig_prior_mean_near_one() {
        let sc = NonSpatialScenario {
            model: NonSpatialModel::GammaInvGamma,
            n: 2000,
            c_l: 0.01,
            replicates: 1,
            seed: 13,
        };
        let ds = &gen_nonspatial(&sc).unwrap()[0];
        let mean = ds.theta_true.mean();
        // Inv-Gam(4, 3): mean 1, sd sqrt(1/2); MC error ~ 4 * sd / sqrt(n)
        assert!((mean - 1.0).abs() < 4.0 * (0.5f64).sqrt() / (2000f64).sqrt());
        assert!(ds.y.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn replicates_replay_and_differ() {
        let sc = NonSpatialScenario {
            model: NonSpatialModel::NormalNormal,
            n: 10,
            c_l: 1.5,
            replicates: 2,
            seed: 5,
        };
        let a = gen_nonspatial(&sc).unwrap();
        let b = gen_nonspatial(&sc).unwrap();
        assert_eq!(a[0].y, b[0].y);
        assert_ne!(a[0].y, a[1].y);
    }
}
