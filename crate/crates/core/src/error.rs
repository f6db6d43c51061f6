use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    /// The penalty sits at or below the divergence boundary `-s_min^2`.
    #[error("singular penalty: lambda = {lambda} is not above -s_min^2 = {boundary}")]
    SingularPenalty { lambda: f64, boundary: f64 },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("kernel matrix is singular or not positive definite: {0}")]
    SingularKernel(String),

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("gradient descent diverged after {iters} iterations (|beta| = {norm:e}); step too large")]
    StepTooLarge { iters: usize, norm: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("{path}: bad magic number 0x{found:08x}, expected 0x{expected:08x}")]
    BadMagic {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("{path}: truncated payload, expected {expected} bytes after the header, found {found}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },

    #[error("label {0} outside 0..=9")]
    BadLabel(u8),

    #[error("csv {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("missing data file {path}; {hint}")]
    MissingFile { path: PathBuf, hint: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
