use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid transition model: {0}")]
    InvalidModel(String),

    #[error("degenerate covariance: condition number {condition:.3e} over variables {variables:?}")]
    DegenerateCovariance { variables: Vec<String>, condition: f64 },

    #[error("degenerate channel `{0}`: zero variance")]
    DegenerateChannel(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("cardinality error: {bins} bins requested but channel `{channel}` has {distinct} distinct values")]
    Cardinality {
        channel: String,
        bins: usize,
        distinct: usize,
    },

    #[error("internal consistency error: {quantity} evaluated to {value:e} bits")]
    Inconsistent { quantity: &'static str, value: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("all {0} pairs failed")]
    AllPairsFailed(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
