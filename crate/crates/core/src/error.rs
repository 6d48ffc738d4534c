use thiserror::Error;

/// Errors raised by construction, analysis and file handling.
#[derive(Error, Debug)]
pub enum Error {
    #[error("unsupported ensemble ({j},{k}): only (3,6) chains are implemented")]
    UnsupportedDegrees { j: usize, k: usize },

    #[error("invalid chain length {length}: {reason}")]
    InvalidLength { length: usize, reason: &'static str },

    #[error("invalid connection spec: {0}")]
    InvalidSpec(String),

    #[error("variable {variable} of chain {chain} would reach degree {degree}, above the cap {cap}")]
    DegreeCap {
        chain: usize,
        variable: usize,
        degree: usize,
        cap: usize,
    },

    #[error("protograph has no positive design rate ({n_v} variables, {n_c} checks)")]
    NonPositiveRate { n_v: usize, n_c: usize },

    #[error("unknown slice {0:?}")]
    UnknownSlice(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("density evolution does not converge at zero erasure probability")]
    DegenerateGraph,

    #[error("quantization failure: {0}")]
    Quantization(String),

    #[error("bracket [{low}, {high}] does not straddle the convergence boundary")]
    BadBracket { low: f64, high: f64 },

    #[error("optimizer did not converge: {0}")]
    NotConverged(String),

    #[error("circulant lifting needs distinct shifts for parallel edges of block ({check},{variable})")]
    CirculantCollision { check: usize, variable: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
