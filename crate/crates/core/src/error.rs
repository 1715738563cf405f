use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Coordinates, grid dimensions or scalar arguments outside their valid range.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid layered velocity model.
    #[error("model error: {0}")]
    Model(String),
    /// Scenario or run configuration rejected by validation.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed trace or model file.
    #[error("format error: {0}")]
    Format(String),
    /// Comparison metrics could not be computed.
    #[error("metric error: {0}")]
    Metric(String),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
