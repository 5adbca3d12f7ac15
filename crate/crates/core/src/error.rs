use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Product-state outputs that are not a recognisable basis permutation.
    #[error("classification failed: {0}")]
    Classification(String),

    /// Basis images mixing entangled and product states.
    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by bad user input rather than a broken invariant.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Consistency(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
