use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Replay record written next to every command's primary output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// Unix milliseconds.
    pub started_at_ms: u128,
    pub finished_at_ms: u128,
    pub inputs: Vec<HashedPath>,
    pub outputs: Vec<HashedPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashedPath {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> std::io::Result<HashedPath> {
    Ok(HashedPath {
        path: path.to_path_buf(),
        sha256: sha256_hex(&fs::read(path)?),
    })
}

/// `<primary>.manifest.json`
pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary.with_file_name(name)
}

pub struct ManifestBuilder {
    command_line: Vec<String>,
    started_at_ms: u128,
    config_hash: String,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
}

impl ManifestBuilder {
    pub fn start() -> Self {
        Self {
            command_line: std::env::args().collect(),
            started_at_ms: now_ms(),
            config_hash: String::new(),
            seed: None,
            inputs: Vec::new(),
        }
    }

    pub fn config(mut self, canonical_config: &str) -> Self {
        self.config_hash = sha256_hex(canonical_config.as_bytes());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    /// Hashes inputs and `outputs` and writes the manifest beside `outputs[0]`.
    pub fn finish(self, outputs: &[&Path]) -> std::io::Result<PathBuf> {
        let manifest = RunManifest {
            command_line: self.command_line,
            config_hash: self.config_hash,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            started_at_ms: self.started_at_ms,
            finished_at_ms: now_ms(),
            inputs: self
                .inputs
                .iter()
                .map(|p| hash_file(p))
                .collect::<Result<_, _>>()?,
            outputs: outputs
                .iter()
                .map(|p| hash_file(p))
                .collect::<Result<_, _>>()?,
        };
        let path = manifest_path(outputs[0]);
        let json = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        fs::write(&path, json + "\n")?;
        Ok(path)
    }
}
