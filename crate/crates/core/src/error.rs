// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: self-loop on node '{node}'")]
    SelfLoop { line: usize, node: String },

    #[error("line {line}: negative weight {weight} for layer '{layer}'")]
    NegativeWeight { line: usize, layer: String, weight: f64 },

    #[error("line {line}: unknown layer '{layer}'")]
    UnknownLayer { line: usize, layer: String },

    #[error("unknown node '{0}'")]
    UnknownNode(String),

    #[error("node set is empty")]
    EmptySet,

    #[error("node {0} is not in the node set")]
    NodeNotInSet(u32),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("instance too large for exhaustive search: {size} > cap {cap}")]
    OverCap { size: usize, cap: usize },

    #[error("core level {k} out of range (max {max_k})")]
    KOutOfRange { k: u64, max_k: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParam(msg.into())
}
