use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in input")]
    NonFinite,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("k = {k} must be smaller than the number of points ({n})")]
    KTooLarge { k: usize, n: usize },

    #[error("k = {k} is below the minimum of {min}")]
    KTooSmall { k: usize, min: usize },

    #[error("degenerate neighborhood at point {0}")]
    DegenerateNeighborhood(usize),

    #[error("tangent chart of point {0} has zero extent")]
    DegenerateChart(usize),

    #[error("input normals required but the cloud has none")]
    MissingInputNormals,

    #[error("unknown scalar channel `{0}`")]
    UnknownChannel(String),

    #[error("near-singular system (min eigenvalue sum {0:e})")]
    NearSingular(f64),

    #[error("every point was flagged; no curvature to integrate")]
    AllPointsFlagged,

    #[error("optimization diverged at step {step}: euler = {euler}, loss = {loss}")]
    Diverged {
        step: usize,
        euler: f64,
        loss: f64,
        /// Steps recorded up to and including the failing one.
        trace: Box<crate::topology::OptimizationTrace>,
    },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("report serialization: {0}")]
    Report(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
