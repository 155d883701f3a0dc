use thiserror::Error;

use crate::simplex::LpError;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input exceeds a hard size limit.
    #[error("capacity exceeded: {what} has size {actual}, limit is {limit}")]
    Capacity {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    /// The operation needs structure the input does not have (e.g. a base).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A distance matrix failed the metric axioms.
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    /// Base vectors are not linearly independent.
    #[error("rank-deficient base: pivot {pivot:e} below threshold {threshold:e}")]
    RankDeficient { pivot: f64, threshold: f64 },

    /// Malformed input file or argument.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("linear program: {0}")]
    Lp(#[from] LpError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
