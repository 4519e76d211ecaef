use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Tensor shapes disagree, or a structural invariant is broken.
    #[error("structural error: {0}")]
    Structure(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A table or enumeration would exceed its configured budget.
    #[error("budget exceeded: {what} needs {required}, budget is {budget}")]
    Budget {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    #[error("infeasible allocation: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

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
