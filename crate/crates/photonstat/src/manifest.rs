//! Run manifests: every CLI output file is paired with a JSON record of the
//! full parameter set needed to reproduce it bit-exactly.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::Result;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
    pub duration_secs: f64,
}

/// Collects outputs while a command runs, then writes the manifest.
pub struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str, parameters: serde_json::Value, seed: u64) -> Self {
        Self {
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                parameters,
                seed,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                outputs: Vec::new(),
                duration_secs: 0.0,
            },
            started: Instant::now(),
        }
    }

    pub fn add_output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.to_path_buf());
    }

    /// Write `<name>.manifest.json` next to the outputs.
    pub fn write(mut self, path: &Path) -> Result<RunManifest> {
        self.manifest.duration_secs = self.started.elapsed().as_secs_f64();
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, &self.manifest).map_err(std::io::Error::from)?;
        Ok(self.manifest)
    }
}
