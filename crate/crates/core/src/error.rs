use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("requested split sizes {requested} exceed the {available} available pairs")]
    Size { requested: usize, available: usize },

    #[error("cannot fit a model on an empty corpus")]
    EmptyCorpus,

    #[error("non-finite gradient produced by batch sample {sample}")]
    NonFiniteGradient { sample: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("id mismatch: {0:?}")]
    IdMismatch(Vec<String>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing gold relevance: {0}")]
    MissingGold(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format(_) => "format",
            Error::Size { .. } => "size",
            Error::EmptyCorpus => "empty_corpus",
            Error::NonFiniteGradient { .. } => "non_finite_gradient",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::IdMismatch(_) => "id_mismatch",
            Error::Parse { .. } => "parse",
            Error::MissingGold(_) => "missing_gold",
            Error::Config(_) => "config",
        }
    }
}
