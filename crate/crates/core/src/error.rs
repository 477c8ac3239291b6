use thiserror::Error;

/// Errors raised by the numerical core.
///
/// The CLI maps [`Error::is_user_error`] variants to exit code 2 and all
/// numerical failures to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular point: u = {u} is at (or within {tol:e} of) the pole u = c = {c}")]
    Singularity { u: f64, c: f64, tol: f64 },

    #[error("root finder did not converge: {0}")]
    NonConvergence(String),

    #[error("integration span exceeded {max_span} without reaching the tail equilibrium")]
    SpanExceeded { max_span: f64 },

    #[error("implicit stage solve failed at xi = {xi} (step {step:e}): {reason}")]
    StepFailure { xi: f64, step: f64, reason: String },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("vacuum state: 1 + eta = {value} at x = {x}")]
    Vacuum { x: f64, value: f64 },

    #[error("numerical instability at t = {t}: {detail}")]
    Instability { t: f64, detail: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("linear solver breakdown: {0}")]
    SolverBreakdown(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a
    /// numerical failure.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::WrongRegime(_) | Error::GridMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
