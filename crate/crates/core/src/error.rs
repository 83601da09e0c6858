use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtiError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("node scheme needs at least one node")]
    EmptyNodeScheme,

    #[error("quadrature did not reach tolerance {requested:e} (estimated error {estimated:e}) after {intervals} subintervals")]
    QuadratureFailed { requested: f64, estimated: f64, intervals: usize },

    #[error("{failed} of {total} node evaluations failed, above the {budget_percent}% budget")]
    FailureBudgetExceeded { failed: usize, total: usize, budget_percent: f64 },

    #[error("momentum grid is not mirror-symmetric about p_x = 0")]
    AsymmetricGrid,

    #[error("lineout has no positive weight")]
    EmptyLineout,

    #[error("photon-statistics-force saddle did not converge (residual {residual:e})")]
    PsfNotConverged { residual: f64 },
}

impl AtiError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        AtiError::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, AtiError>;
