use thiserror::Error;

/// Errors raised anywhere in the engine, the ingest paths and the experiment harness.
#[derive(Debug, Error)]
pub enum CdamError {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("lookup failed: {0}")]
    Lookup(String),

    #[error("gave up after {attempts} attempts: {what}")]
    RetryExhausted { what: String, attempts: usize },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("energy undefined: {0}")]
    EnergyUndefined(String),

    #[error("numeric divergence: non-finite state at step {step}")]
    NumericDivergence { step: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("ingest error: {0}")]
    Ingest(String),

    #[error("automaton spec error: {0}")]
    Spec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CdamError>;
