use thiserror::Error;

/// Errors raised by evaluators, solvers and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: argument outside domain ({msg})")]
    Domain { op: &'static str, msg: String },

    #[error("{op}: result out of range ({msg})")]
    Range { op: &'static str, msg: String },

    /// The requested accuracy was not reached; `partial` is the best value available.
    #[error("{op}: accuracy not reached ({msg}); partial value {partial:e}")]
    Accuracy {
        op: &'static str,
        msg: String,
        partial: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("history too coarse: {0}")]
    Resolution(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
