//! Synthetic data generators for the benchmark experiments at desk scale:
//! the non-spatial RLS x n factorial design and the four spatial scenarios
//! with multinomial count constraints and expected-count scaling.

mod lattice;
mod matern;
mod nonspatial;
mod spatial;

pub use lattice::{default_expected_counts, lattice_centroids, lattice_graph, LATTICE_SPACING};
pub use matern::{matern_cov, CholeskyFactor, SymMatrix};
pub use nonspatial::{
    cl_for_rls, empirical_rls, gen_nonspatial, FittedConjugate, NonSpatialModel,
    NonSpatialScenario, CL_LEVELS, GIG_ALPHA0, GIG_BETA0, NN_MU0, NN_TAU0_SQ,
};
pub use spatial::{
    elevated_set, gen_spatial, multinomial_counts, poisson_counts, CountModel, SpatialKind,
    SpatialScenario, VariabilityLevel, MATERN_NU, MATERN_PHI, SF_LEVELS,
};

use crate::ensemble::Ensemble;

/// Where a synthetic dataset came from: enough to regenerate it exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetProvenance {
    pub label: String,
    pub seed: u64,
    pub replicate: u64,
}

/// A generated dataset: the true ensemble, the per-unit scale vector
/// (expected counts for the spatial scenarios; sampling variances or Gamma
/// shapes for the non-spatial models), and the observations (integer counts
/// for spatial data, stored as floats alongside the real-valued non-spatial
/// observations).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub theta_true: Ensemble<f64>,
    pub scale: Vec<f64>,
    pub y: Vec<f64>,
    pub provenance: DatasetProvenance,
}
