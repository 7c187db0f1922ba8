//! Crate-wide error type.
//!
//! Variants map onto the CLI exit-code contract: `Domain` and `Config` are
//! validation failures (exit 2), `Capacity` is a size-budget refusal (exit 3)
//! and `Io` wraps filesystem errors (exit 4).

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// Input violates a mathematical precondition (odd pairing size, crossing
    /// partition, nonstationary coefficients, ...).
    Domain(String),
    /// A size budget would be exceeded; the message names the cap.
    Capacity(String),
    /// Misconfigured model or oracle (dimension mismatch, bad generator).
    Config(String),
    /// A denominator in a residual evaluation vanished.
    Singular(String),
    /// An oracle failed while evaluating a specific partition block.
    Oracle { block: String, message: String },
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Capacity(m) => write!(f, "capacity error: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Singular(m) => write!(f, "singularity: {m}"),
            Error::Oracle { block, message } => {
                write!(f, "oracle failure on block {block}: {message}")
            }
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
