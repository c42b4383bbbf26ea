use thiserror::Error;

/// Errors produced by the simulators and the run orchestration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("unknown scenario '{name}'; valid scenarios: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("insufficient statistics: {count} accepted trajectories, at least 2 required")]
    InsufficientStatistics { count: u64 },

    #[error("non-finite value in {what} at step {step}")]
    NonFinite { what: &'static str, step: usize },

    #[error("Fock space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("norm drift {drift:e} at tau = {tau} exceeds tolerance {tol:e}; reduce the step size")]
    NormDrift { drift: f64, tau: f64, tol: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
