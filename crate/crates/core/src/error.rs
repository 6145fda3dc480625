//! Error type shared across the crate.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value violated a mathematical precondition (dimension, range, finiteness).
    #[error("invalid input: {0}")]
    Domain(String),

    /// A simplex point touched the boundary where logits are undefined.
    #[error("boundary point: component {index} = {value} is not strictly positive")]
    Boundary { index: usize, value: f64 },

    /// Integrator step size out of range.
    #[error("invalid step size h = {0}: must be in (0, 0.01]")]
    StepSize(f64),

    /// Array shape mismatch between an operation's inputs.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Config file problem, with 1-based line number where applicable.
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    /// A required config key was not provided.
    #[error("missing required config key `{0}`")]
    MissingKey(&'static str),

    /// Dataset name not recognized.
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    /// IDX file does not start with the expected magic number.
    #[error("bad IDX magic 0x{found:08x} at byte offset {offset} (expected 0x{expected:08x})")]
    BadMagic { found: u32, expected: u32, offset: usize },

    /// IDX file ended before the declared payload.
    #[error("truncated file: needed {needed} bytes at offset {offset}, found {found}")]
    Truncated { offset: usize, needed: usize, found: usize },

    /// IDX element type other than unsigned byte.
    #[error("unsupported IDX dtype 0x{dtype:02x} at byte offset {offset}")]
    UnsupportedDtype { dtype: u8, offset: usize },

    /// Checkpoint version is not one this build can read.
    #[error("checkpoint version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    /// Checkpoint payload does not match its architecture descriptor.
    #[error("corrupt checkpoint payload: {0}")]
    CorruptPayload(String),

    /// Checkpoint was produced by a different network architecture.
    #[error("architecture mismatch: {0}")]
    ArchMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
