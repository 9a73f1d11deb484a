use std::io;

/// Toolkit-wide error type. Decode errors are kept distinct from I/O and
/// usage errors so the CLI can map them to separate exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported transform size {0}")]
    UnsupportedSize(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed bitstream: {0}")]
    MalformedStream(String),
    #[error("unsupported bitstream version {0}")]
    VersionMismatch(u8),
    #[error("truncated payload: {0}")]
    Truncated(String),
    #[error("malformed input file: {0}")]
    MalformedInput(String),
    #[error("two-pass log error: {0}")]
    TwoPassLog(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
