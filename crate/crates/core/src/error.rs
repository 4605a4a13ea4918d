use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("degree {requested} exceeds the exactness bound {bound} of the quadrature rule")]
    DegreeBoundExceeded { requested: usize, bound: usize },

    #[error("degree {requested} out of range (maximum {max})")]
    DegreeOutOfRange { requested: usize, max: usize },

    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    #[error("pole {0} lies on the support of the measure")]
    PoleOnSupport(String),

    #[error("degenerate shift: {0}")]
    DegenerateShift(String),

    #[error("singular denominator determinant (pivot ratio {condition:e})")]
    SingularDenominator { condition: f64 },

    #[error("refinement check failed: relative change {change:e} exceeds {tolerance:e}")]
    RefinementFailure { change: f64, tolerance: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("complexity limit: {0}")]
    ComplexityLimit(String),

    #[error("insufficient samples: relative standard error {relative:e} exceeds {tolerance:e}")]
    InsufficientSamples { relative: f64, tolerance: f64 },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures caused by floating point quality rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PrecisionLoss(_)
                | Error::SingularDenominator { .. }
                | Error::RefinementFailure { .. }
                | Error::InsufficientSamples { .. }
        )
    }
}
