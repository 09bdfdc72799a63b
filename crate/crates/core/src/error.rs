use thiserror::Error;

/// Library-wide error type. Variants map onto the CLI exit-code contract:
/// `Config` exits 2, everything else exits 3 unless it represents a
/// criterion/tolerance failure handled by the harness (exit 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree error: {0}")]
    Degree(String),

    #[error("variance mismatch: {0}")]
    Variance(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("advection failure: {0}")]
    Advection(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
