//! Run manifest: resolved config snapshot, seed, tool version and a SHA-256
//! digest of every output file, written as `manifest.toml` next to the
//! outputs so a run can be audited and reproduced.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use nanosieve::Result;

use crate::config::Config;

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a Config,
    /// Output path (relative to the manifest) -> "sha256:<hex>".
    pub outputs: BTreeMap<String, String>,
}

impl<'a> RunManifest<'a> {
    pub fn new(command: &'a str, seed: u64, config: &'a Config) -> Self {
        Self {
            tool: "nanosieve",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            outputs: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, out_dir: &Path, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let rel = path
            .strip_prefix(out_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .into_owned();
        self.outputs.insert(rel, format!("sha256:{}", hex::encode(digest)));
        Ok(())
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.toml");
        let text = toml::to_string_pretty(self)
            .map_err(|e| nanosieve::Error::Numeric(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
