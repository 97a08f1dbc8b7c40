use thiserror::Error;

/// Errors surfaced by the public API.
///
/// Degenerate estimators (zero-variance denominators and the like) are not
/// errors: they are signalled in-band and mapped to a zero window statistic,
/// so a sweep never aborts on a constant subsegment.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("estimator failure: {0}")]
    Estimator(String),

    #[error("critical-value table: {0}")]
    Table(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn estimator(msg: impl Into<String>) -> Self {
        Error::Estimator(msg.into())
    }

    pub(crate) fn table(msg: impl Into<String>) -> Self {
        Error::Table(msg.into())
    }
}
