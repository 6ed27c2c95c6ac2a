use std::path::PathBuf;

/// Errors produced by image handling, loss evaluation, and the CLI front end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left_height}x{left_width} vs {right_height}x{right_width}")]
    DimensionMismatch {
        left_height: usize,
        left_width: usize,
        right_height: usize,
        right_width: usize,
    },

    #[error("plane {height}x{width} is too small (minimum {min_height}x{min_width})")]
    TooSmall {
        height: usize,
        width: usize,
        min_height: usize,
        min_width: usize,
    },

    #[error("plane data length {len} does not match {height}x{width}")]
    BadLength {
        height: usize,
        width: usize,
        len: usize,
    },

    #[error("plane contains a non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("scale {scale} is out of range (expected 0 < scale <= 1)")]
    InvalidScale { scale: f64 },

    #[error("scale {scale} shrinks {height}x{width} below 3x3")]
    ScaleTooAggressive {
        scale: f64,
        height: usize,
        width: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("failed to decode {path}: {source}")]
    Decode {
        path: PathBuf,
        source: image::ImageError,
    },

    #[error("failed to encode {path}: {source}")]
    Encode {
        path: PathBuf,
        source: image::ImageError,
    },

    #[error("{path} is not a PNG file")]
    NotPng { path: PathBuf },

    #[error("{path}: unsupported pixel layout {layout} (expected 8-bit grayscale or RGB)")]
    UnsupportedPixelFormat { path: PathBuf, layout: String },

    #[error("{0}")]
    Cli(String),
}

pub type Result<T> = std::result::Result<T, Error>;
