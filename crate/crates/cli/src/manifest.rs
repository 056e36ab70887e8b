//! Run manifests written next to every artifact set.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct ObjectiveInfo {
    pub name: String,
    pub version: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub timestamp: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    /// Input path to hex SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveInfo>,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: serde_json::to_value(config)?,
            seeds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            objective: None,
        })
    }

    pub fn seed(mut self, name: &str, value: u64) -> Self {
        self.seeds.insert(name.to_string(), value);
        self
    }

    /// Records the digest of a file, or of every file directly inside a directory.
    pub fn input(mut self, path: &Path) -> Result<Self> {
        let files = if path.is_dir() {
            let mut entries: Vec<_> = fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            entries.sort();
            entries
        } else {
            vec![path.to_path_buf()]
        };
        for file in files {
            let bytes = fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            self.inputs.insert(file.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        }
        Ok(self)
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        write_json(&out_dir.join("manifest.json"), self)
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
