use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed PGM header or pixel payload.
    #[error("pgm parse error: {0}")]
    Parse(String),

    #[error("pgm length error: expected {expected} pixel bytes, found {found}")]
    Length { expected: usize, found: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("range error: {0}")]
    Range(String),

    /// A domain invariant or operation precondition was violated.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("offset ({dr}, {dc}) leaves no in-bounds pixel pairs on a {width}x{height} image")]
    EmptyPairs {
        dr: isize,
        dc: isize,
        width: usize,
        height: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    /// Bad user input at the command surface (unknown feature names and the like).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
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

    /// Innermost error, with any cell annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Cell { source, .. } => source.root(),
            other => other,
        }
    }
}
