use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("missing column: expected `{expected}` at position {position}, found `{found}`")]
    MissingColumn {
        expected: String,
        found: String,
        position: usize,
    },

    #[error("unknown category `{value}` in column `{column}` (row {row})")]
    UnknownCategory {
        column: String,
        value: String,
        row: usize,
    },

    #[error("non-numeric cell `{value}` in column `{column}` (row {row})")]
    NonNumericCell {
        column: String,
        value: String,
        row: usize,
    },

    #[error("invalid record at row {row}: {reason}")]
    InvalidRecord { row: usize, reason: String },

    #[error("table is empty")]
    EmptyTable,

    #[error("need at least {needed} rows, got {got}")]
    InsufficientRows { needed: usize, got: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("covariance matrix is not symmetric positive definite")]
    InvalidCovariance,

    #[error("not enough neighbors: need {needed} rows besides the query, have {available}")]
    NotEnoughNeighbors { needed: usize, available: usize },

    #[error("Laplace scale must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("sensitivity must be positive and finite, got {0}")]
    InvalidSensitivity(f64),

    #[error("privacy budget must be positive and finite, got {0}")]
    InvalidBudget(f64),

    #[error("the Laplace mechanism only supports continuous columns; `{0}` is categorical")]
    CategoricalUnsupported(String),

    #[error("invalid degree {0}")]
    InvalidDegree(i64),

    #[error("raw-data sensitivity is zero; effective epsilon is undefined")]
    ZeroRawSensitivity,

    #[error("generator `{name}` failed: {source}")]
    GeneratorFailure {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error("reference pool too small: {0}")]
    InsufficientPool(String),

    #[error("schema has no label column")]
    NoLabelColumn,

    #[error("training data holds a single class")]
    SingleClass,

    #[error("schema of evaluation table does not match the model")]
    SchemaMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("TOML error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn generator(name: impl Into<String>, source: Error) -> Self {
        Error::GeneratorFailure {
            name: name.into(),
            source: Box::new(source),
        }
    }
}
