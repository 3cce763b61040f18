use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-numeric feature {value:?} at row {row}, column {column}")]
    NonNumericFeature {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: usize },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("label column {0:?} not found")]
    LabelColumnNotFound(String),

    #[error("cannot flip single-class labels")]
    SingleClassNoise,

    #[error("invalid noise rate {0}")]
    InvalidNoiseRate(f64),

    #[error("invalid fold count k={k} for n={n}")]
    InvalidFoldCount { k: usize, n: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("non-splittable granular-ball")]
    NonSplittable,

    #[error("purity must be in (0,1]")]
    InvalidPurity(f64),

    #[error("attribute {0} is already in the subset")]
    AttributeInSubset(usize),

    #[error("attribute index {index} out of range for d={d}")]
    AttributeOutOfRange { index: usize, d: usize },

    #[error("duplicate attribute index {0}")]
    DuplicateAttribute(usize),

    #[error("knn k={k} exceeds training size {n}")]
    KnnTooLarge { k: usize, n: usize },

    #[error("distance parameter C must be positive, got {0}")]
    InvalidDistanceParameter(f64),

    #[error("ball set does not match dataset: {0}")]
    BallSetMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
