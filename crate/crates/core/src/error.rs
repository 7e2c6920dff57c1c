use thiserror::Error;

/// Errors raised across the simulator and analysis pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate seed: an all-zero register is a fixed point of the LFSR")]
    DegenerateSeed,

    #[error("invalid taps: {0}")]
    InvalidTaps(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("enumeration of {required} cells exceeds the budget of {budget}; shrink the key length, M or the observation count")]
    Infeasible { required: u128, budget: u128 },

    #[error("need more data: {0}")]
    NeedsMoreData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
