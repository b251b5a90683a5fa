use std::io;

use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are grouped so that callers (the CLI in particular) can map
/// them onto process exit codes: configuration and contract problems are
/// caller mistakes, transport problems are environmental.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("ring mismatch: {left} vs {right} bits")]
    RingMismatch { left: u32, right: u32 },

    #[error("value {value} does not fit in a {bits}-bit ring")]
    OutOfRing { value: u128, bits: u32 },

    #[error("transport: {0}")]
    Transport(String),

    #[error("handshake rejected: {0}")]
    Handshake(String),

    #[error("protocol desync: {0}")]
    Desync(String),

    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    /// Whether the error stems from the network rather than from the inputs.
    pub fn is_transport(&self) -> bool {
        matches!(
            self,
            Error::Transport(_) | Error::Io(_) | Error::Desync(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
