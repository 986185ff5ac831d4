//! Run manifest: config hash, seed and per-stage output digests.
//!
//! Output CSV/JSON digests are the reproducibility contract: identical
//! config and seed must reproduce them byte for byte. Wall times are
//! recorded for diagnostics only, so the manifest file itself is not
//! expected to be byte-stable.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDigest {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: String,
    pub wall_ms: u128,
    pub outputs: Vec<OutputDigest>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot hash {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

impl RunManifest {
    pub fn new(config_bytes: &[u8], seed: u64) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: sha256_hex(config_bytes),
            seed,
            stages: Vec::new(),
        }
    }

    /// Loads an existing manifest when config hash and seed match, so
    /// stage-by-stage invocations accumulate into one record.
    pub fn load_or_new(path: &Path, config_bytes: &[u8], seed: u64) -> Self {
        let fresh = Self::new(config_bytes, seed);
        match std::fs::read(path) {
            Ok(bytes) => match serde_json::from_slice::<RunManifest>(&bytes) {
                Ok(old)
                    if old.config_hash == fresh.config_hash
                        && old.seed == seed
                        && old.tool_version == fresh.tool_version =>
                {
                    old
                }
                _ => fresh,
            },
            Err(_) => fresh,
        }
    }

    /// Replaces any stage of the same name, keeping execution order.
    pub fn record_stage(&mut self, record: StageRecord) {
        self.stages.retain(|s| s.name != record.name);
        self.stages.push(record);
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)
            .with_context(|| format!("cannot write manifest {}", path.display()))?;
        Ok(())
    }
}

/// Helper collecting outputs and timing for one stage.
pub struct StageTimer {
    name: String,
    started: Instant,
    out_dir: PathBuf,
    outputs: Vec<OutputDigest>,
}

impl StageTimer {
    pub fn start(name: &str, out_dir: &Path) -> Self {
        Self {
            name: name.to_string(),
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
            outputs: Vec::new(),
        }
    }

    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        let rel = path
            .strip_prefix(&self.out_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .into_owned();
        self.outputs.push(OutputDigest {
            path: rel,
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn finish(self, status: &str) -> StageRecord {
        StageRecord {
            name: self.name,
            status: status.to_string(),
            wall_ms: self.started.elapsed().as_millis(),
            outputs: self.outputs,
        }
    }
}
