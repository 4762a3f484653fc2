use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid setup: geometry, grids, scenario values.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// An argument outside the domain of the operation (E <= 0, Q off-grid, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Model A lost too much weight off the edges of the energy basis.
    #[error("failed transition: {leaked:.3} of the spectral weight fell outside the basis")]
    FailedTransition { leaked: f64 },

    #[error("populations undefined: no probability inside the active region")]
    UndefinedPopulations,

    #[error("scenario parse error at line {line}, key `{key}`: {message}")]
    Parse {
        key: String,
        line: usize,
        message: String,
    },

    #[error("invalid value for `{key}`: {message}")]
    InvalidKey { key: String, message: String },

    /// A scenario stage failed; `stage` names it.
    #[error("stage `{stage}` failed: {source}")]
    Stage { stage: String, source: Box<Error> },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage: stage.into(),
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn key(key: &str, msg: impl Into<String>) -> Self {
        Error::InvalidKey {
            key: key.to_string(),
            message: msg.into(),
        }
    }
}
