use thiserror::Error;

/// Failure modes shared by every module.
///
/// `Invalid` covers malformed input; the remaining variants are numerical
/// guards that fired on otherwise well-formed input.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("ambiguous kernel: {0}")]
    AmbiguousKernel(String),
    #[error("obstruction: {0}")]
    Obstruction(String),
    #[error("numerical guard: {0}")]
    Numerical(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
