//! Post-processing of joint posterior draws of a parameter ensemble:
//! optimal point-estimate ensembles under a menu of loss functions,
//! posterior-regret evaluation of plug-in candidates, exact and MCMC model
//! fitters, and the synthetic-data generators used by the simulation
//! harnesses.
//!
//! The universal input is a [`PosteriorDrawMatrix`]: `S` joint draws of an
//! `n`-vector ensemble. Everything deterministic (quantiles, ranks, losses,
//! estimators, regrets) is generic over the scalar type via [`scalar::Real`];
//! the samplers work in `f64`.

// `!(x > 0.0)` style checks double as NaN rejection in the validators
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classification;
pub mod dispersion;
pub mod ensemble;
pub mod error;
pub mod estimators;
pub mod models;
pub mod scalar;
pub mod simulation;
mod special;

pub use crate::ensemble::{Ensemble, PosteriorDrawMatrix, QuantileSet, RankVector};
pub use crate::error::{Error, Result};
pub use crate::estimators::{EnsembleEstimate, EstimatorRule};
pub use crate::scalar::Real;

/// Concrete aliases for the default double-precision pipeline.
pub type Ensemble64 = Ensemble<f64>;
pub type PosteriorDrawMatrix64 = PosteriorDrawMatrix<f64>;
pub type EnsembleEstimate64 = EnsembleEstimate<f64>;
pub type LossReport64 = dispersion::LossReport<f64>;
