use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {msg}")]
    Parse { file: String, line: u64, msg: String },

    #[error("feature dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("edge references unknown node id {0}")]
    UnknownNode(String),

    #[error("unknown category name {0:?}")]
    UnknownCategory(String),

    #[error("node {node} out of range (graph has {num_nodes} nodes)")]
    NodeOutOfRange { node: NodeId, num_nodes: usize },

    #[error("hop {hop} out of range {min}..={max}")]
    HopOutOfRange { hop: usize, min: usize, max: usize },

    #[error("invalid split policy: {0}")]
    InvalidSplit(String),

    #[error("class {class:?} has {available} labeled nodes, {required} required")]
    InsufficientClass {
        class: String,
        available: usize,
        required: usize,
    },

    #[error("task list is empty")]
    EmptyTasks,

    #[error("invalid prompt id {0:?}")]
    InvalidPromptId(String),

    #[error("invalid prompt spec: {0}")]
    InvalidSpec(String),

    #[error("sample does not match prompt spec: {0}")]
    SpecMismatch(String),

    #[error("budget {budget} below the empty-structure size {floor}")]
    BudgetTooSmall { budget: usize, floor: usize },

    #[error("node {0} has no label")]
    Unlabeled(NodeId),

    #[error("no eligible candidate for node {node} at hop {hop}")]
    NoCandidate { node: NodeId, hop: usize },

    #[error("malformed structure text at byte {pos}: {msg}")]
    Malformed { pos: usize, msg: String },

    #[error("token format {0:?} lacks an {{id}} placeholder")]
    MissingPlaceholder(String),

    #[error("prediction/gold alignment: {0}")]
    Alignment(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for filesystem failures, as opposed to validation failures.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
