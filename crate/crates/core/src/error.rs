use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric positive definite (pivot {pivot:e} at index {index}, tolerance {tolerance:e})")]
    NotSpd {
        index: usize,
        pivot: f64,
        tolerance: f64,
    },
    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} is outside the supported range 1..=64")]
    UnsupportedDimension(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("direction vector must be nonzero")]
    ZeroDirection,
    #[error("covariance is not diagonal: off-diagonal entry ({row}, {col}) = {value:e}")]
    NotDiagonal { row: usize, col: usize, value: f64 },
    #[error("correlation {value} is outside the admissible range ({lower}, 1) for dimension {dim}")]
    InvalidCorrelation { value: f64, lower: f64, dim: usize },
    #[error("unsupported input shape: {0}")]
    UnsupportedShape(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("parameter outside its domain: {0}")]
    DomainError(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("sampler did not converge: {0}")]
    NotConverged(String),
    #[error("grid resolution {found} is below the minimum {minimum}")]
    ResolutionTooLow { found: usize, minimum: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotSpd { .. } | Error::NoConvergence(_) | Error::NotConverged(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSpd { .. } => "not_spd",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::UnsupportedDimension(_) => "unsupported_dimension",
            Error::NonFinite(_) => "non_finite",
            Error::ZeroDirection => "zero_direction",
            Error::NotDiagonal { .. } => "not_diagonal",
            Error::InvalidCorrelation { .. } => "invalid_correlation",
            Error::UnsupportedShape(_) => "unsupported_shape",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::DomainError(_) => "domain_error",
            Error::NoConvergence(_) => "no_convergence",
            Error::NotConverged(_) => "not_converged",
            Error::ResolutionTooLow { .. } => "resolution_too_low",
            Error::InvalidInput(_) => "invalid_input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
