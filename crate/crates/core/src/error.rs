use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial `{0}` is not univariate")]
    NotUnivariate(String),
    #[error("matrix dimension mismatch: {left_rows}x{left_cols} times {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("unknown wavelet `{name}`; valid names: {valid}")]
    UnknownWavelet { name: String, valid: String },
    #[error("unknown scheme `{name}`; valid names: {valid}")]
    UnknownScheme { name: String, valid: String },
    #[error("invalid wavelet: {0}")]
    InvalidWavelet(String),
    #[error("scheme `{scheme}` was not built from wavelet `{wavelet}`")]
    NotDerived { scheme: String, wavelet: String },
    #[error("scheme `{0}` cannot be optimized")]
    NotOptimizable(String),
    #[error("image {axis} is {len}, which is not a positive even number")]
    OddDimension { axis: &'static str, len: usize },
    #[error("image is empty")]
    EmptyImage,
    #[error("component sizes differ: {0}")]
    SizeMismatch(String),
    #[error("plan precision is {plan}, data precision is {data}")]
    PrecisionMismatch { plan: &'static str, data: &'static str },
    #[error("malformed PGM header: {0}")]
    PgmHeader(String),
    #[error("truncated PGM data: expected {expected} samples, found {found}")]
    PgmTruncated { expected: usize, found: usize },
    #[error("unsupported image magic `{0}`; expected P2 or P5")]
    PgmMagic(String),
    #[error("subband header mismatch in {path}: {reason}")]
    SubbandHeader { path: PathBuf, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
