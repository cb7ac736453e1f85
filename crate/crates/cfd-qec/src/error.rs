use thiserror::Error;

/// Errors produced by code construction, channel algebra, and benchmarks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} exceeds the supported maximum of {max}", max = crate::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid coupling vector: {0}")]
    InvalidCoupling(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("Knill-Laflamme conditions violated: max violation {max_violation:.3e} exceeds tolerance {tol:.3e}")]
    KlViolation { max_violation: f64, tol: f64 },

    #[error("operator is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("empty sample set")]
    EmptySamples,

    #[error("no sign change of p_code - p_physical over bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("error probability underflows double precision in the fit window (min p = {0:.3e})")]
    UnderflowWindow(f64),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
