use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge list is empty: no graph to analyze")]
    EmptyGraph,

    #[error("person name is empty after normalization")]
    EmptyName,

    #[error("node id {0} is out of range")]
    InvalidNode(usize),

    #[error("density is undefined for graphs with fewer than 2 nodes (n = {0})")]
    TooFewNodes(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("alias cycle: canonical name {0:?} is itself an alias")]
    AliasCycle(String),

    #[error("alias {alias:?} maps to both {first:?} and {second:?}")]
    ConflictingAlias {
        alias: String,
        first: String,
        second: String,
    },

    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("correlation needs at least 2 observations with nonzero variance")]
    ZeroVariance,

    #[error(
        "eigenvector power iteration did not converge in {iterations} iterations \
         (last change {last_delta:e}); retry with damping, e.g. --eigen-mixing 0.999"
    )]
    NonConvergence { iterations: usize, last_delta: f64 },

    #[error("power-law fit needs {needed} tail points at d >= {dmin}, found {found}")]
    InsufficientTail { dmin: usize, needed: usize, found: usize },

    #[error("power-law tail samples have no spread (all equal to {0})")]
    DegenerateTail(usize),

    #[error("no community has at least {min_size} members; lower the size threshold")]
    NothingRetained { min_size: usize },

    #[error("k must be positive")]
    InvalidK,

    #[error("k-means needs at least k = {k} points, got {points}")]
    TooFewPoints { k: usize, points: usize },

    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("affiliation table is empty")]
    EmptyAffiliations,

    #[error("unknown affiliation category {0:?}")]
    UnknownCategory(String),

    #[error("person {name:?} listed with two categories ({first} and {second})")]
    ConflictingAffiliation {
        name: String,
        first: String,
        second: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("GraphML: {0}")]
    GraphMl(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::InvalidK => ErrorClass::Usage,
            Error::NonConvergence { .. } | Error::ZeroVariance | Error::DegenerateTail(_) => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }
}
