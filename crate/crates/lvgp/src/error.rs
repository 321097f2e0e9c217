use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The CLI maps these onto process exit codes: schema/data problems exit
/// with 2, numerical failures with 3, and usage errors with 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at data row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("unknown level '{level}' for variable '{variable}'")]
    UnknownLevel { variable: String, level: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("singular correlation matrix: {0}")]
    SingularMatrix(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("unfittable model: {0}")]
    Unfittable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model file error: {0}")]
    ModelFile(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error: 2 for data/schema problems,
    /// 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Schema(_)
            | Error::Parse { .. }
            | Error::EmptyDataset(_)
            | Error::UnknownLevel { .. }
            | Error::ModelFile(_)
            | Error::Io { .. } => 2,
            Error::DimensionMismatch { .. }
            | Error::SingularMatrix(_)
            | Error::NumericalDegeneracy(_)
            | Error::Unfittable(_) => 3,
            Error::InvalidArgument(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
