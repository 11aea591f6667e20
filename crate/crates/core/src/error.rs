use thiserror::Error;

/// Why a graph cannot carry the random-walk PMI machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkabilityError {
    #[error("graph is disconnected ({} components, sizes {component_sizes:?})", component_sizes.len())]
    Disconnected { component_sizes: Vec<usize> },

    /// `coloring[i]` is the side (0 or 1) of node `i` in a proper 2-coloring.
    #[error("graph is bipartite (2-coloring found over {} nodes)", coloring.len())]
    Bipartite { coloring: Vec<u8> },

    #[error("node {node} has zero degree")]
    IsolatedNode { node: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("self-loop on node {0:?}")]
    SelfLoop(String),
    #[error("non-positive weight {0}")]
    NonPositiveWeight(String),
    #[error("malformed line: {0}")]
    Malformed(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error(transparent)]
    NotWalkable(#[from] WalkabilityError),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
