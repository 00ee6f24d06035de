use thiserror::Error;

/// Errors raised by the numerical kernels and experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("bracket failure: {0}")]
    BracketFailure(String),

    #[error("resonant mode: determinant {determinant:e} below {threshold:e}")]
    ResonantMode { determinant: f64, threshold: f64 },

    #[error("coercivity constant is not positive: {0:e}")]
    NonPositiveCoercivity(f64),

    #[error("resolution exceeded: {0}")]
    ResolutionExceeded(String),

    #[error("normalization failure: {0}")]
    NormalizationFailure(String),

    #[error("deformation too large: {0}")]
    DeformationTooLarge(String),

    #[error("epsilon below resolution: {0}")]
    EpsilonBelowResolution(String),

    #[error("not star-shaped: {rays} rays with multiple transitions")]
    NotStarShaped { rays: usize },

    #[error("center outside the favorable set")]
    CenterOutside,
}

pub type Result<T> = std::result::Result<T, Error>;
