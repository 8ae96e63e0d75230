use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all modules of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "rejection sampling failed: {accepted} accepted out of {draws} draws \
         (rate {rate:.3e}, minimum {min_rate:.1e})"
    )]
    SamplingFailure {
        accepted: u64,
        draws: u64,
        rate: f64,
        min_rate: f64,
    },

    #[error("finite-difference stencil leaves the active set at node {node:?}, offset {offset:?}")]
    Stencil { node: Vec<i64>, offset: Vec<i64> },

    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("radial equation degenerate at r = {r}: {what}")]
    Degenerate { r: f64, what: String },

    #[error("csv format error at line {line}: {msg}")]
    CsvFormat { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
