use thiserror::Error;

/// Errors produced by fitting, weighting and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SoilError {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("restricted design is rank deficient")]
    RankDeficient,
    #[error("model with {size} variables cannot be fitted on {rows} rows")]
    TooManyVariables { size: usize, rows: usize },
    #[error("response contains a single class")]
    OneClassOnly,
    #[error("operation requires a {expected} task")]
    WrongTask { expected: &'static str },
    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),
    #[error("coordinate descent produced a non-finite value at lambda={lambda}")]
    NonFinite { lambda: f64 },
    #[error("dimension mismatch: expected p={expected}, got p={found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("enumeration of all subsets requested for p={0} (limit 20)")]
    TooLarge(usize),
    #[error("every log-score is -inf")]
    AllInfinite,
    #[error("no candidate model could be fitted on split {split}")]
    NoFittableCandidate { split: usize },
    #[error("length mismatch: {left} weights for {right} candidate models")]
    LengthMismatch { left: usize, right: usize },
    #[error("threshold {0} lies outside (0, 1)")]
    BadThreshold(f64),
    #[error("AR(1) correlation {0} lies outside [0, 1)")]
    BadRho(f64),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("column '{0}' not found")]
    MissingColumn(String),
    #[error("classification response must be 0 or 1, found {value} at row {row}")]
    NonBinaryResponse { row: usize, value: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SoilError {
    fn from(err: std::io::Error) -> Self {
        SoilError::Io(err.to_string())
    }
}

pub type Result<T, E = SoilError> = std::result::Result<T, E>;
