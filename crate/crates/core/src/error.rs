use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("nonphysical state: {0}")]
    NonPhysical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bound violation: {0}")]
    BoundViolation(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("integration failure at t = {time}: {message}")]
    Integration { time: f64, message: String },

    #[error("integration failure for n = {n}: {source}")]
    Row {
        n: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures that originate in the numerics rather than the inputs.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Integration { .. } | Error::NonPhysical(_) | Error::InvalidState(_) => true,
            Error::Row { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
