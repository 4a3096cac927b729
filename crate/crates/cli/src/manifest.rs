use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use colabel::models::{hex_digest, NativeModel, FORMAT_VERSION};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ModelEntry {
    pub name: String,
    #[serde(rename = "type")]
    pub model_type: String,
    pub level: String,
    pub format_version: u32,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ScorerEntry {
    pub name: String,
    pub endpoint: String,
    pub levels: Vec<String>,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: Vec<String>,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileHash>,
    pub models: Vec<ModelEntry>,
    pub scorers: Vec<ScorerEntry>,
    pub outputs: Vec<FileHash>,
    pub timestamp_unix: u64,
}

pub fn hash_file(path: &Path) -> Result<FileHash, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(FileHash { path: path.display().to_string(), sha256: hex_digest(&bytes) })
}

impl ModelEntry {
    pub fn of(model: &NativeModel) -> Self {
        ModelEntry {
            name: colabel::models::Scorer::name(model).to_string(),
            model_type: model.type_name().to_string(),
            level: model.level().to_string(),
            format_version: FORMAT_VERSION,
            sha256: model.content_hash(),
        }
    }
}

impl RunManifest {
    pub fn new(seed: u64, config: &BTreeMap<String, String>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            seed,
            config: config.clone(),
            inputs: Vec::new(),
            models: Vec::new(),
            scorers: Vec::new(),
            outputs: Vec::new(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(hash_file(path)?);
        Ok(())
    }

    /// Hashes the outputs and writes the manifest to `path`.
    pub fn finish(mut self, outputs: &[PathBuf], path: &Path) -> Result<(), CliError> {
        for o in outputs {
            self.outputs.push(hash_file(o)?);
        }
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        fs::write(path, json + "\n").map_err(|e| CliError::io(path, e))
    }
}

/// `<out>.manifest.json` next to a single-file output.
pub fn beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
