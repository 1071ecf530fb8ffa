use thiserror::Error;

use crate::brw::TraceRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("address error: {0}")]
    Address(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("data unavailable: {0}")]
    Unavailable(String),

    #[error("sampling failure: {0}")]
    SampleFailure(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    /// The population cap was exceeded. The partial trace up to and including
    /// `generation` is attached.
    #[error("population cap exceeded at generation {generation}")]
    Truncated {
        generation: u32,
        trace: Box<TraceRecord>,
    },
}

impl Error {
    pub(crate) fn address(msg: impl Into<String>) -> Self {
        Error::Address(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
