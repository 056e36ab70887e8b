//! Content-addressed on-disk cache of chat responses.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the model name and prompt.
pub fn cache_key(model: &str, prompt: &str) -> String {
    let digest = Sha256::new().chain_update(model.as_bytes()).chain_update(b"\n").chain_update(prompt.as_bytes()).finalize();
    hex::encode(digest)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model: String,
    pub prompt: String,
    pub response: String,
}

#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// The cached response, if present and recorded for exactly this model and prompt.
    /// Unreadable or mismatching entries are treated as misses.
    pub fn get(&self, model: &str, prompt: &str) -> Option<String> {
        let bytes = fs::read(self.path(&cache_key(model, prompt))).ok()?;
        let entry: CacheEntry = serde_json::from_slice(&bytes).ok()?;
        (entry.model == model && entry.prompt == prompt).then_some(entry.response)
    }

    /// Writes through a temporary file and a rename so readers never see a partial entry.
    pub fn put(&self, model: &str, prompt: &str, response: &str) -> io::Result<()> {
        let key = cache_key(model, prompt);
        let entry = CacheEntry { model: model.into(), prompt: prompt.into(), response: response.into() };
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            serde_json::to_writer(&mut f, &entry)?;
            f.flush()?;
        }
        fs::rename(&tmp, self.path(&key))
    }
}
