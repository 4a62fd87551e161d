use std::path::PathBuf;

use thiserror::Error;

use crate::constraints::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A CSV record whose arity differs from the header. `row` is the 0-based data row index.
    #[error("structural error at data row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("feature `{feature}`: {message}")]
    Feature { feature: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constraint syntax error: {0}")]
    Parse(#[from] ParseError),

    #[error("statement `{statement}` references unknown feature `{feature}`")]
    ConstraintReference { statement: String, feature: String },

    #[error(
        "gradient descent diverged after {iterations} iterations (objective rose {streak} times in a row); try a smaller step size"
    )]
    Diverged { iterations: usize, streak: usize },

    #[error("model error: {0}")]
    Model(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn feature(feature: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Feature {
            feature: feature.into(),
            message: message.into(),
        }
    }
}
