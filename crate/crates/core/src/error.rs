// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the segmentation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Arguments violate an operation's preconditions (bad index range,
    /// mismatched lengths, invalid series or grid).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The solver configuration is inconsistent, e.g. a pruning strategy
    /// combined with a constraint it cannot handle.
    #[error("configuration error: {0}")]
    Config(String),
    /// A size or length guard tripped (instance too large for brute force,
    /// series too short for an estimator, ...).
    #[error("guard: {0}")]
    Guard(String),
    /// No admissible segmentation exists under the requested constraint.
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub(crate) fn guard(msg: impl Into<String>) -> Self {
        Self::Guard(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
