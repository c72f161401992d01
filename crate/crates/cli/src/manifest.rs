//! Run manifests: what went in, what came out, and with which settings.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn hashes(paths: &[PathBuf], relative_to: Option<&Path>) -> Result<Vec<FileHash>, CliError> {
    paths
        .iter()
        .map(|p| {
            let shown = relative_to.and_then(|base| p.strip_prefix(base).ok()).unwrap_or(p);
            Ok(FileHash { path: shown.display().to_string(), sha256: sha256_file(p)? })
        })
        .collect()
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value, started_unix: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_unix,
            finished_unix: started_unix,
        }
    }

    /// Hashes the files and writes `manifest.json` into `dir`; output paths
    /// are recorded relative to `dir`.
    pub fn write(mut self, dir: &Path, inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<PathBuf, CliError> {
        self.inputs = hashes(inputs, None)?;
        self.outputs = hashes(outputs, Some(dir))?;
        self.finished_unix = now_unix();
        let path = dir.join(FILE_NAME);
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
