use thiserror::Error;

use crate::network::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line} ({element}): {message}")]
    Parse {
        line: usize,
        element: String,
        message: String,
    },

    #[error("the extract contains no drivable road inside the rectangle")]
    EmptyNetwork,

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("no route from vertex {source_vertex} to vertex {target}")]
    NoRoute {
        source_vertex: VertexId,
        target: VertexId,
    },

    #[error("vertex {0} is not reachable in both shortest-path trees")]
    NotInTrees(VertexId),

    #[error("shortest-path trees do not match: {0}")]
    TreeMismatch(String),

    #[error("set similarity needs at least two routes, got {0}")]
    UndefinedSimilarity(usize),

    #[error("no records match the cohort filter")]
    EmptyCohort,

    #[error("travel time {0} s is outside every length category")]
    Uncategorized(f64),

    #[error("network file version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt network file: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
