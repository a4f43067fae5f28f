use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("certainty {value} at component {index} is outside [0, 1]")]
    CertaintyOutOfRange { index: usize, value: f64 },

    #[error("position ({x}, {y}) is not finite")]
    NonFinitePosition { x: f64, y: f64 },

    #[error("no categories learned yet")]
    NoCategories,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("length mismatch: {left} predictions vs {right} ground-truth labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("contingency table is empty")]
    EmptyTable,

    #[error("invalid synthetic spec: {0}")]
    Synth(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// True for errors caused by malformed input (files, flags, streams)
    /// rather than by the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::NoCategories)
    }
}
