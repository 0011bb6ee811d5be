//! Text-to-speech front-end and codec toolkit.
//!
//! - [`tokenizer`]: character/pinyin hybrid front-end with a BPE vocabulary
//! - [`quantizer`]: VQ and FSQ layers, utilization analytics, a toy VQ-VAE
//! - [`signal`]: frame-rate arithmetic, latent interpolation, log-mel frames
//! - [`sequence`]: LLM training/inference layouts and EOS-driven decoding
//! - [`eval`]: CER/WER, speaker similarity, polyphone and results tables
//! - [`cli`]: the `ttskit` command-line front door

pub mod cli;
pub mod error;
pub mod eval;
pub mod quantizer;
pub mod rng;
pub mod sequence;
pub mod signal;
pub mod tokenizer;

pub use error::{Error, Result};
