use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;

pub const MANIFEST_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    /// Named sub-streams derived from the seed, with their stream ids.
    pub streams: BTreeMap<String, u64>,
}

impl SeedRecord {
    pub fn new(seed: u64) -> Self {
        let streams = [rng::TOKENIZER_MIX, rng::QUANT_INIT, rng::QUANT_DATA]
            .into_iter()
            .map(|n| (n.to_string(), rng::stream_id(n)))
            .collect();
        Self { seed, streams }
    }
}

/// Everything needed to replay one invocation and check its results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub tool: String,
    pub tool_version: String,
    /// Arguments as typed, without the program name.
    pub argv: Vec<String>,
    /// Arguments after merging `--config` values.
    pub effective_args: Vec<String>,
    /// Contents of the `--config` file, if any.
    pub config: Option<serde_json::Value>,
    pub seeds: SeedRecord,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub stdout_sha256: String,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let m: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Parse(format!("unsupported manifest version {}", m.version)));
        }
        Ok(m)
    }

    /// Fails on the first input that is missing or whose digest changed.
    pub fn verify_inputs(&self) -> Result<()> {
        for f in &self.inputs {
            let got = file_digest(&f.path).map_err(|e| match e {
                Error::Io(io) => Error::Io(std::io::Error::new(
                    io.kind(),
                    format!("{}: {io}", f.path.display()),
                )),
                other => other,
            })?;
            if got != f.sha256 {
                return Err(Error::Digest { path: f.path.clone() });
            }
        }
        Ok(())
    }
}
