use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are split between *validation* errors (bad inputs, dimension
/// mismatches, malformed specs) and *numerical* errors (degenerate or
/// ill-posed computations). [`Error::is_validation`] distinguishes the two so
/// callers can map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ensemble must contain at least one value")]
    EmptyEnsemble,

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate unit id `{0}`")]
    DuplicateUnitId(String),

    #[error("first quartile is zero; the quartile ratio is undefined on this scale, use the IQR instead")]
    ZeroFirstQuartile,

    #[error("draws mix signs or contain zeros; the quartile ratio is only defined for positive ensembles, use the IQR-based losses instead")]
    SignMixedDraws,

    #[error("posterior means are all equal; the constrained estimator is undefined for degenerate ensembles")]
    DegenerateEnsemble,

    #[error("rate denominator is zero; the requested classification rate is undefined")]
    UndefinedRate,

    #[error("adjacency is not symmetric: {0} lists {1} but not vice versa")]
    AsymmetricAdjacency(usize, usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("scenario infeasible: {0}")]
    InfeasibleScenario(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("error at draw {draw}: {source}")]
    AtDraw {
        draw: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by malformed inputs rather than by a
    /// numerically ill-posed computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::EmptyEnsemble
            | Error::NonFinite(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidProbability(_)
            | Error::InvalidParameter(_)
            | Error::DuplicateUnitId(_)
            | Error::AsymmetricAdjacency(_, _)
            | Error::InvalidGraph(_) => true,
            Error::ZeroFirstQuartile
            | Error::SignMixedDraws
            | Error::DegenerateEnsemble
            | Error::UndefinedRate
            | Error::InfeasibleScenario(_)
            | Error::Numerical(_) => false,
            Error::AtDraw { source, .. } => source.is_validation(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
