use thiserror::Error;

/// Errors surfaced by constructors and operations with checked domains.
///
/// Index errors (out-of-range subcarrier, bad beam id) panic like any other
/// slice access; this enum covers the cases a caller can plausibly recover
/// from or report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ADC bit resolution must be a positive integer (got {0})")]
    InvalidBits(u32),

    #[error("exhaustive search size cap exceeded: {0}")]
    SizeCap(String),

    #[error("queue-level computation supports at most {cap} users, got {got}")]
    UserCap { cap: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
