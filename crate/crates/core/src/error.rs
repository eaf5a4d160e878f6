use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a special function or constant.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    /// Grids or vector lengths do not match.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("spectral solver failed: {0}")]
    Spectral(String),
    #[error("solver failed: {0}")]
    Solver(String),
    /// A mathematical hypothesis required by a routine does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
