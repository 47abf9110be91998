use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{row}:{col}: {msg}")]
    Parse {
        path: PathBuf,
        /// 1-based line number.
        row: usize,
        /// 1-based column (field) number.
        col: usize,
        msg: String,
    },
    #[error("{path}:{row}:{col}: price relative must be positive")]
    NonPositiveRelative { path: PathBuf, row: usize, col: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("returns series too short for a Sharpe ratio (need at least 2)")]
    TooFewReturns,
    #[error(transparent)]
    Solver(#[from] weber_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
