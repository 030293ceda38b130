//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tile count mismatch: grid implies {expected} tiles, found {found}")]
    TileCountMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sensing matrix must satisfy M <= N, got M={m}, N={n}")]
    MeasurementCountExceedsSignal { m: usize, n: usize },

    #[error("sensing matrix is numerically rank deficient")]
    RankDeficient,

    #[error("weight entry {index} is not strictly positive ({value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("solver selected atom {0} twice; numerical breakdown")]
    DuplicateAtom(usize),

    #[error("measurement vector is empty")]
    EmptyMeasurements,

    #[error("corrupt measurement file: {0}")]
    CorruptMeasurementFile(String),

    #[error("nothing to run: {0}")]
    NothingToRun(String),
}
