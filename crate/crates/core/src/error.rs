use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GaspError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GaspError {
    #[error("edge {edge}: self-loop on node {node}")]
    SelfLoop { edge: usize, node: usize },

    #[error("edge {edge}: node {node} out of range (graph has {node_count} nodes)")]
    NodeOutOfRange {
        edge: usize,
        node: usize,
        node_count: usize,
    },

    #[error("edge {edge}: duplicate of edge {first} between nodes {u} and {v}")]
    DuplicateEdge {
        edge: usize,
        first: usize,
        u: usize,
        v: usize,
    },

    #[error("edge {edge}: weights must be finite and non-negative (w+={w_plus}, w-={w_minus})")]
    InvalidWeight { edge: usize, w_plus: f64, w_minus: f64 },

    #[error("nodes {0} and {1} are already in the same cluster")]
    SameCluster(usize, usize),

    #[error("key {0} is already in the heap")]
    DuplicateKey(usize),

    #[error("heap is empty")]
    EmptyHeap,

    #[error("initial cluster containing node {0} is not connected in the graph")]
    DisconnectedCluster(usize),

    #[error("initial partition covers {got} nodes, graph has {expected}")]
    PartitionSize { expected: usize, got: usize },

    #[error("clusters of nodes {0} and {1} share no edge")]
    NotAdjacent(usize, usize),

    #[error("edge {0} has non-positive weight; classic HAC needs a positive graph")]
    NonPositiveWeight(usize),

    #[error("graph is not connected")]
    NotConnected,

    #[error("invalid value for {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("no voxels left to evaluate after applying the ignore label")]
    EmptyOverlap,

    #[error("unknown linkage rule {0:?} (expected sum, absmax, average, max or min)")]
    UnknownRule(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: byte offset {offset}: {message}")]
    Payload {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GaspError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        GaspError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
