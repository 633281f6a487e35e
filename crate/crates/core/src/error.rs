use alloc::string::String;

/// Errors raised by the band computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error(
        "bounds are not ELL-symmetric: g[{index}] deviates from 1 - h[n+1-i] by {deviation:e}"
    )]
    SymmetryViolation { index: usize, deviation: f64 },

    #[error("n = {n} exceeds the enumeration limit of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("no calibrated asymptotic constant for alpha = {0}")]
    UnsupportedAlpha(f64),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("table has no grid points")]
    EmptyTable,

    #[error("n = {n} outside table range [{lo}, {hi}]")]
    OutOfRange { n: usize, lo: usize, hi: usize },

    #[error("degenerate sample: {0}")]
    Degenerate(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("transform domain error: cannot take -log10 of {value}")]
    TransformDomain { value: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
