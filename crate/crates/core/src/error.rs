use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the atlas pipeline library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("query file is missing required column `{column}`")]
    MissingColumn { column: String },

    #[error("duplicate author_id `{author_id}` on rows {first_row} and {second_row}")]
    DuplicateAuthor {
        author_id: String,
        first_row: usize,
        second_row: usize,
    },

    #[error("row {row}: {message}")]
    InvalidRow { row: usize, message: String },

    #[error("malformed corpus file at byte {offset}: {message}")]
    CorpusParse { offset: usize, message: String },

    #[error("unsupported corpus schema version {0}")]
    UnsupportedVersion(u64),

    #[error("record `{record_id}` refers to unknown author `{author_id}`")]
    UnknownAuthor { record_id: String, author_id: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no term reaches the minimum count of {min_count}")]
    EmptyVocabulary { min_count: u64 },

    #[error("need at least {needed} distinct frequencies, found {found}")]
    TooFewFrequencies { needed: usize, found: usize },

    #[error("optimizer did not converge after {iterations} iterations (best value {value} at {best:?})")]
    NotConverged {
        iterations: usize,
        best: Vec<f64>,
        value: f64,
    },

    #[error("objective returned NaN at {point:?}")]
    NanObjective { point: Vec<f64> },

    #[error("term absent from all documents")]
    ZeroVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite distance between points {i} and {j}")]
    NonFiniteDistance { i: usize, j: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("degenerate masses: {0}")]
    DegenerateMasses(String),

    #[error("author `{author_id}` has no terms in the embedding")]
    EmptyPattern { author_id: String },

    #[error("Sinkhorn did not converge in {iterations} iterations (marginal residual {residual:e})")]
    SinkhornNotConverged { iterations: usize, residual: f64 },

    #[error("transport between `{left}` and `{right}` failed: {source}")]
    PairFailed {
        left: String,
        right: String,
        #[source]
        source: Box<Error>,
    },

    #[error("cluster {0} has no members")]
    EmptyCluster(usize),

    #[error("degenerate table: a row or column margin is zero")]
    DegenerateTable,

    #[error("zero rank variance")]
    ZeroRankVariance,

    #[error("no nonzero pairs")]
    NoNonzeroPairs,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
