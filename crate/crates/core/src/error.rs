use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The polar projection is not unique: the smallest singular value is at
    /// or below the rank threshold.
    #[error("matrix is rank deficient (sigma_min = {sigma_min:e}); projection onto the Stiefel manifold is ill-posed")]
    RankDeficient { sigma_min: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("graph is not connected (n = {n}, p = {p}) after {retries} attempts")]
    NotConnected { n: usize, p: f64, retries: usize },

    #[error("mixing matrix has no spectral gap (sigma_2 = {sigma2})")]
    SpectralGapViolation { sigma2: f64 },

    #[error("mixing matrix violates the weight assumptions: {0}")]
    InvalidMixing(String),

    #[error(
        "inexact prox stalled: squared residual {achieved:e} above target {target:e} after {iterations} iterations"
    )]
    SolverStall {
        achieved: f64,
        target: f64,
        iterations: usize,
    },

    #[error("bad IDX magic number {found:#010x} (expected {expected:#010x})")]
    BadMagic { found: u32, expected: u32 },

    #[error("truncated IDX file: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },

    #[error("IDX dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("malformed input on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Config(#[from] crate::harness::ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(what: &str, expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            expected: format!("{what} {}x{}", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        });
    }
    Ok(())
}
