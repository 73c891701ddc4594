//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Rough classification of an error, used by callers (notably the CLI) to
/// pick an exit code without matching on every variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Invalid configuration or usage.
    Config,
    /// Malformed, inconsistent, or degenerate input data.
    Data,
    /// Numeric failure during training or evaluation.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty batch")]
    EmptyBatch,
    #[error("batch mixes instances from different time indices")]
    MixedTimeIndices,
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sensitive and label values must be 0 or 1 (got {0})")]
    NonBinaryValue(u8),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid weight table: {0}")]
    InvalidWeightTable(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no history to forecast from")]
    EmptyHistory,
    #[error("alpha out of range: {0}")]
    AlphaOutOfRange(f64),

    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("sample weights must be non-negative with at least one positive")]
    InvalidSampleWeights,
    #[error("diverged")]
    Diverged,

    #[error("undefined: empty group")]
    EmptyGroup,
    #[error("undefined: no positives in group")]
    NoPositivesInGroup,
    #[error("undefined: no negatives in group")]
    NoNegativesInGroup,
    #[error("AUC undefined")]
    AucUndefined,
    #[error("empty series")]
    EmptySeries,
    #[error("series too short: need at least 2 values")]
    SeriesTooShort,

    #[error("invalid stream: {0}")]
    InvalidStream(String),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("missing column: {0}")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },
    #[error("no usable rows after ingestion")]
    EmptyData,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    /// Which broad class of failure this is. The mapping is deliberately
    /// coarse: anything about option values is `Config`, anything about the
    /// inputs themselves is `Data`, and only genuine numeric breakdown is
    /// `Numeric`.
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InvalidConfig(_) | AlphaOutOfRange(_) | InvalidSpec(_) => ErrorCategory::Config,
            Diverged => ErrorCategory::Numeric,
            _ => ErrorCategory::Data,
        }
    }
}
