//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("page index {index} out of range (block has {pages} pages)")]
    PageOutOfRange { index: usize, pages: usize },
    #[error("wordline {wordline} is {found:?}, operation requires {expected}")]
    Phase {
        wordline: usize,
        found: crate::array::Phase,
        expected: &'static str,
    },
    #[error("page length {found} does not match cells per wordline {expected}")]
    Length { found: usize, expected: usize },
    #[error("page {0} has not been written")]
    Unwritten(usize),
    #[error("block capacity exceeded: {requested} pages requested, {capacity} available")]
    Capacity { requested: usize, capacity: usize },
    #[error("invalid parameter {key}: {reason}")]
    Param { key: &'static str, reason: String },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn param(key: &'static str, reason: impl Into<String>) -> Self {
        Error::Param {
            key,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user-supplied configuration.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Param { .. } | Error::Config { .. } | Error::Geometry(_))
    }
}
