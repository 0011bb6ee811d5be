use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("id {id} at position {position} is out of range (limit {limit})")]
    OutOfRange { position: usize, id: u64, limit: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sequence format error in slot `{slot}`: {message}")]
    Format { slot: &'static str, message: String },

    #[error("protocol error: generator produced id {id} at step {step}")]
    Protocol { step: usize, id: u32 },

    #[error("training diverged at step {step}")]
    Divergence { step: usize },

    #[error("digest mismatch for {}", path.display())]
    Digest { path: PathBuf },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported audio: {0}")]
    Audio(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),
}
