use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes at the given specialization")]
    SingularSpecialization,
    #[error("no value assigned to variable {0}")]
    MissingVariable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("delta index {index} outside the declared window {window}")]
    DeltaWindow { index: i64, window: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("rewrite step did not decrease the termination measure: {0}")]
    Termination(String),
    #[error("conditional expectation extraction failed: {0}")]
    Extraction(String),
    #[error("vector is not in the span: {0}")]
    NotInSpan(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("cache i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
