use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: no rows")]
    NoRows { path: PathBuf },

    #[error("{path}: parse error at row {row}, column {col}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        message: String,
    },

    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    Ragged {
        path: PathBuf,
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("{path}: line {line}: self-loop on node {node}")]
    SelfLoop {
        path: PathBuf,
        line: usize,
        node: usize,
    },

    #[error("{path}: line {line}: negative edge weight {weight}")]
    NegativeWeight {
        path: PathBuf,
        line: usize,
        weight: f64,
    },

    #[error("invalid data matrix: {0}")]
    InvalidData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("negative weight {weight} at ({row}, {col})")]
    NegativeMatrixWeight { row: usize, col: usize, weight: f64 },

    #[error("need more than {neighbor_count} points, got {points}")]
    TooFewPoints { points: usize, neighbor_count: usize },

    #[error("dense eigensolver limited to dimension {limit}, got {dim}")]
    DenseThresholdExceeded { dim: usize, limit: usize },

    #[error("eigensolver did not converge after {matvecs} matrix-vector products (residual {residual:e})")]
    NoConvergence { matvecs: usize, residual: f64 },

    #[error("requested {clusters} clusters for {points} points")]
    TooManyClusters { clusters: usize, points: usize },

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("indicator vector is all zero")]
    ZeroIndicator,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
