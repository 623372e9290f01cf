use thiserror::Error;

/// Errors raised by constructors, solvers and oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("arm index {index} out of range for {n} arms")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("the maximum-weight set is not unique")]
    NonUniqueOptimum,
    #[error("infeasible structure: {0}")]
    Infeasible(String),
    #[error("enumeration exceeded the cap of {cap} sets")]
    EnumerationCap { cap: usize },
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("no set is approximately feasible for the threshold")]
    NoApproxFeasible,
    #[error("family has a single member")]
    SingletonFamily,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
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

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
