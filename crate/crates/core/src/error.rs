use std::path::PathBuf;

/// Error type shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input violates a mathematical precondition (non-SPD tensor, J <= 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid mesh topology or geometry.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// A nonlinear or linear solver failed to converge.
    #[error("solver error: {0}")]
    Solver(String),

    /// Invalid configuration value or file.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed data in a text file.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
