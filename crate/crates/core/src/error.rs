use thiserror::Error;

/// Errors raised anywhere in the engine.
///
/// The variants map onto the CLI exit codes: argument/capability errors are
/// usage errors, precondition and contradiction failures are check failures,
/// everything numeric is a numeric error.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integration error: {0}")]
    Integration(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("incomplete spectrum: {0}")]
    IncompleteSpectrum(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
