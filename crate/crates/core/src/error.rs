use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while loading, transforming or repairing a graph.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    #[error("missing artifact: {name} ({path})")]
    MissingArtifact { name: &'static str, path: PathBuf },

    #[error("malformed {what} at {location}: {detail}")]
    Parse {
        what: &'static str,
        location: String,
        detail: String,
    },

    #[error("bad magic in {path}: expected {expected:?}")]
    BadMagic { path: PathBuf, expected: &'static str },

    #[error("node index out of range: {index} >= {num_nodes}")]
    NodeOutOfRange { index: usize, num_nodes: usize },

    #[error("label out of range: {label} >= {num_classes} (node {node})")]
    LabelOutOfRange {
        node: usize,
        label: usize,
        num_classes: usize,
    },

    #[error("self-loop on node {0} is not allowed in the edge list")]
    SelfLoop(usize),

    #[error("feature row count {found} does not match num_nodes {expected}")]
    FeatureRowCount { expected: usize, found: usize },

    #[error("feature column count {found} does not match num_features {expected}")]
    FeatureColumnCount { expected: usize, found: usize },

    #[error("non-finite feature at node {node}, column {column}")]
    NonFiniteFeature { node: usize, column: usize },

    #[error("label count {found} does not match num_nodes {expected}")]
    LabelCount { expected: usize, found: usize },

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("too few nodes to split: {0} (need at least 10)")]
    TooFewNodes(usize),

    #[error("insufficient victims for perturbator {perturbator}: {available} candidates, budget {budget}")]
    InsufficientVictims {
        perturbator: usize,
        available: usize,
        budget: usize,
    },

    #[error("confusion count underflow at ({z}, {y})")]
    CountUnderflow { z: usize, y: usize },

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MissingFile(_) => "missing-file",
            Error::MissingArtifact { .. } => "missing-artifact",
            Error::Parse { .. } => "parse",
            Error::BadMagic { .. } => "bad-magic",
            Error::NodeOutOfRange { .. } => "node-out-of-range",
            Error::LabelOutOfRange { .. } => "label-out-of-range",
            Error::SelfLoop(_) => "self-loop",
            Error::FeatureRowCount { .. } => "feature-row-count",
            Error::FeatureColumnCount { .. } => "feature-column-count",
            Error::NonFiniteFeature { .. } => "non-finite-feature",
            Error::LabelCount { .. } => "label-count",
            Error::ShapeMismatch { .. } => "shape-mismatch",
            Error::NonFinite(_) => "non-finite",
            Error::InvalidConfig(_) => "invalid-config",
            Error::TooFewNodes(_) => "too-few-nodes",
            Error::InsufficientVictims { .. } => "insufficient-victims",
            Error::CountUnderflow { .. } => "count-underflow",
            Error::Json { .. } => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
