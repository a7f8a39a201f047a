use thiserror::Error;

/// Errors raised by the solver, root finders and certificate builders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("nonlinearity is not of ignition type: f'(1) = {slope} must be negative")]
    NotIgnition { slope: f64 },

    #[error("numerical instability at t = {t}: non-finite value in {field}")]
    Instability { t: f64, field: &'static str },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("root bracket failure on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    BracketFailure {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("initial data cannot be trapped: {0}")]
    NotTrappable(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("run aborted by observer at t = {t}: {reason}")]
    Aborted { t: f64, reason: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
