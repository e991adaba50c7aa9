use std::path::PathBuf;

use thiserror::Error;

use crate::topology::NodeId;
use crate::workload::ServiceId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Every offending field of a config file, by key name.
    #[error("config validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("invalid link {a}-{b}: {reason}")]
    InvalidLink { a: NodeId, b: NodeId, reason: String },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("node {0} has no incident links")]
    UndefinedMetric(NodeId),

    #[error("node {target} is unreachable from node {from}")]
    Unreachable { from: NodeId, target: NodeId },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("placement plan has no node for service {0}")]
    IncompletePlan(ServiceId),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
