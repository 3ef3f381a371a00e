use thiserror::Error;

/// Crate-wide error type.
///
/// Numerical failures carry enough context to tell *which* quantity went
/// wrong; data errors point at the offending row or column.
#[derive(Error, Debug)]
pub enum Error {
    #[error("column {0:?} not found in CSV header")]
    MissingColumn(String),

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    ParseError {
        row: usize,
        column: String,
        value: String,
    },

    #[error("dataset contains no rows")]
    EmptyDataset,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("sequence too short: {0}")]
    SequenceTooShort(String),

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("precision matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("objective became non-finite: {0}")]
    NonFiniteObjective(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("target at position {0} is zero; percentage error is undefined")]
    ZeroTarget(usize),

    #[error("scenario {index}: {source}")]
    Scenario {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
