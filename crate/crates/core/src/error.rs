use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("label column {0:?} not present in header")]
    MissingLabelColumn(String),

    #[error("cannot parse value {value:?} at data row {row}, column {col}")]
    Parse { row: usize, col: usize, value: String },

    #[error("dataset has no data rows")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("max_samples {max_samples} is below the class count {classes}")]
    MaxSamplesBelowClassCount { max_samples: usize, classes: usize },

    #[error("kernel bandwidth must be positive and finite, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("matrix dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid kernel matrix: {0}")]
    InvalidKernel(String),

    #[error("symmetric eigensolver failed to converge")]
    EigensolverFailure,

    #[error("eigenvalue {0:e} is below the round-off band; the input is not positive semidefinite")]
    NegativeEigenvalue(f64),

    #[error("alpha must be positive and different from 1, got {0}")]
    InvalidAlpha(f64),

    #[error("no remaining features to choose from")]
    NoRemainingFeatures,

    #[error("feature index {0} is not among the remaining candidates")]
    UnknownCandidate(usize),

    #[error("permutation count must be at least 1")]
    InvalidPermutationCount,

    #[error("probability must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("feature subset is empty")]
    EmptyFeatureSubset,

    #[error("feature index {index} out of range for {features} features")]
    FeatureOutOfRange { index: usize, features: usize },

    #[error("sample lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("at least {needed} samples are required, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("input sample is empty")]
    EmptyInput,

    #[error("replay produced a different selection: expected {expected:?}, got {actual:?}")]
    ReplayMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
