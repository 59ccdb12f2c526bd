use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),
    #[error("series did not converge after {terms} terms (last term {last_term:e})")]
    Convergence { terms: usize, last_term: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("matrix exponential overflow at t = {0}")]
    Overflow(f64),
    #[error("non-finite value at node {node} (t = {t})")]
    NonFinite { node: usize, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
