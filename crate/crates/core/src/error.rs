use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the training stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {op} got {left} and {right}")]
    Shape {
        op: &'static str,
        left: String,
        right: String,
    },

    #[error("non-finite value in {context}")]
    Numeric { context: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: bad format: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: inconsistent contents: {reason}")]
    Consistency { path: PathBuf, reason: String },

    #[error("{path}: truncated at byte offset {offset} (needed {needed} more bytes)")]
    Truncated {
        path: PathBuf,
        offset: u64,
        needed: u64,
    },

    #[error("{path}: {source}{hint}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
        hint: String,
    },

    #[error("incompatible checkpoint version {found} (this build reads version {expected})")]
    Version { found: u32, expected: u32 },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("training diverged at layer {layer}, batch {batch}: mean |loss| = {loss}")]
    Diverged {
        layer: usize,
        batch: usize,
        loss: f64,
    },
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::Shape {
            op,
            left: format!("{}x{}", left.0, left.1),
            right: format!("{}x{}", right.0, right.1),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
            hint: String::new(),
        }
    }

    /// Short machine-readable tag, used in error records written by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape { .. } => "shape",
            Error::Numeric { .. } => "numeric",
            Error::Argument(_) => "argument",
            Error::Usage(_) => "usage",
            Error::Format { .. } => "format",
            Error::Consistency { .. } => "consistency",
            Error::Truncated { .. } => "truncated",
            Error::Io { .. } => "io",
            Error::Version { .. } => "version",
            Error::Config(_) => "config",
            Error::Diverged { .. } => "diverged",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
