use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("strategy index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("coordinate {index} is {value}; simplex points must be strictly positive")]
    NonPositiveCoordinate { index: usize, value: f64 },

    #[error("coordinates sum to {sum}, which is too far from 1 to renormalize")]
    NotNormalized { sum: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    /// The log-barrier is infinite on the boundary of the simplex.
    #[error("barrier divergence: coordinate {index} of the state is zero")]
    BarrierDivergence { index: usize },

    #[error("boundary approach at t = {t}: coordinate {index} = {value:e} fell below the floor")]
    BoundaryApproach { t: f64, index: usize, value: f64 },

    #[error("step underflow at t = {t}: adaptive step shrank to {h:e}")]
    StepUnderflow { t: f64, h: f64 },

    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    #[error("reference conserved quantity is zero or non-finite ({0})")]
    ZeroReference(f64),

    #[error("empty trajectory")]
    EmptyTrajectory,
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }

    /// Errors raised while stepping an ODE, as opposed to bad inputs.
    pub fn is_integration_failure(&self) -> bool {
        matches!(
            self,
            Error::BoundaryApproach { .. }
                | Error::StepUnderflow { .. }
                | Error::NonFiniteState { .. }
        )
    }
}
