use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("measures are defined on different outcome lists")]
    OutcomeMismatch,

    #[error("dataset {0} is not a member of the universe")]
    NotInUniverse(String),

    #[error("universe too large: {size} datasets exceeds the cap of {cap}")]
    Resource { size: u128, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("support set is empty: {0}")]
    EmptySupport(String),

    #[error("support set is not connected: {0}")]
    Disconnected(String),

    #[error("conditioning on an event of probability zero: {0}")]
    IllDefined(String),

    #[error("posterior undefined: every likelihood is zero at the observed output")]
    UndefinedPosterior,
}

pub type Result<T> = std::result::Result<T, Error>;
