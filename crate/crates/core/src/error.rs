use thiserror::Error;

/// Errors raised by the decoherence library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evolution drifted beyond the density-matrix invariant tolerances.
    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    /// Requested evolution would not fit in the configured history budget.
    #[error(
        "history storage of {required_bytes} bytes exceeds budget of {budget_bytes} bytes; \
         maximum feasible t_final is {max_t_final:e} s"
    )]
    HistoryExhausted {
        required_bytes: u128,
        budget_bytes: u128,
        max_t_final: f64,
    },

    /// An oracle was asked to run outside the regime where its estimator is trustworthy.
    #[error("oracle precondition violated: {0}")]
    OraclePrecondition(String),

    /// Fock-space truncation leaves more thermal tail than the tolerance allows.
    #[error("fock cutoff {cutoff} leaves tail {tail:e} > {tolerance:e}; cutoff must be at least {required}")]
    CutoffTooSmall {
        cutoff: usize,
        required: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("parse error in {source_name} line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
