use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not converge for {what} (achieved error {achieved:e})")]
    Quadrature { what: String, achieved: f64 },

    #[error("tolerance {requested:e} unreachable: {reason}")]
    ToleranceUnreachable { requested: f64, reason: String },

    #[error("no sign change on ({lo}, {hi}): values {f_lo:e}, {f_hi:e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("exchange algorithm failed: {0}")]
    Remez(String),

    #[error("degenerate alternation: {0}")]
    DegenerateAlternation(String),

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
