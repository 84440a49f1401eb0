use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: cannot decode image: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("{path}: unsupported image format (expected PNG, PPM or PGM)")]
    UnsupportedFormat { path: PathBuf },

    #[error("{path}: cannot encode image: {reason}")]
    Encode { path: PathBuf, reason: String },

    #[error("malformed key file: {0}")]
    MalformedKey(String),

    #[error("unsupported key format version {found} (expected {expected})")]
    KeyVersion { found: u32, expected: u32 },

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("image has a zero dimension ({width}x{height})")]
    EmptyImage { width: usize, height: usize },

    #[error("watermark contains no 1 bits")]
    BlankWatermark,

    #[error("{what}: expected {expected} samples, got {actual}")]
    SampleCount {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("{width}x{height} is not divisible by 2^{levels}")]
    Indivisible { width: usize, height: usize, levels: u32 },

    #[error("capacity exceeded: {needed} sites needed, {available} available")]
    Capacity { needed: usize, available: usize },

    #[error("signal length {0} must be even and non-zero")]
    OddLength(usize),

    #[error("approximation has {approx} samples but detail has {detail}")]
    LengthMismatch { approx: usize, detail: usize },

    #[error("correlation undefined: image has zero variance")]
    ZeroVariance,

    #[error("rectangle {x},{y} {w}x{h} exceeds {width}x{height} image")]
    RectOutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Broad failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Domain,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::Decode { .. }
            | Error::UnsupportedFormat { .. }
            | Error::Encode { .. }
            | Error::MalformedKey(_)
            | Error::KeyVersion { .. } => ErrorKind::Io,
            _ => ErrorKind::Domain,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
