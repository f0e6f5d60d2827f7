//! Crate-wide error type.

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no ticks")]
    NoTicks,

    #[error("empty day")]
    EmptyDay,

    #[error("insufficient history: need more than {needed} points, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error(
        "unnormalized input: value {value} at (timestamp {row}, channel {channel}) outside [0, 1]"
    )]
    UnnormalizedInput {
        row: usize,
        channel: usize,
        value: f64,
    },

    #[error("no real spikes in window")]
    NoRealSpikes,

    #[error("zero price at index {0}")]
    ZeroPrice(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("line {line}: {msg}")]
    CsvRow { line: u64, msg: String },

    #[error("line {line}: non-monotone timestamp")]
    NonMonotoneTimestamp { line: u64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("all trials failed")]
    AllTrialsFailed,

    #[error("unsatisfiable search range for {0}")]
    UnsatisfiableRange(String),

    #[error("container format: {0}")]
    Container(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
