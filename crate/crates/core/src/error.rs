use thiserror::Error;

/// Errors produced by the numerical routines and file loaders.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resolvent near a pole at omega = {omega:.6e} rad/s (condition estimate {condition:.3e})")]
    NearPole { omega: f64, condition: f64 },
    #[error("computation failed: {0}")]
    Computation(String),
    #[error("bracket [{lo:.6e}, {hi:.6e}] does not straddle the stability boundary")]
    Bracket { lo: f64, hi: f64 },
    #[error("covariance is not physical: {0}")]
    Inconsistent(String),
    #[error("degenerate field data: {0}")]
    Degenerate(String),
    #[error("initial guess failed: {0}")]
    Guess(String),
    #[error("line {line}: {msg}")]
    Load { line: usize, msg: String },
    #[error("invalid config at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
