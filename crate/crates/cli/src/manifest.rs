//! Machine-readable run manifest: resolved configuration, diagnostics, and
//! digests of every output file.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ResolvedConfig;

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Free-form convergence/diagnostic numbers, stable key order.
#[derive(Debug, Default, Serialize)]
pub struct Diagnostics {
    pub entries: Vec<(String, f64)>,
}

impl Diagnostics {
    pub fn push(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), value));
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub code_version: &'static str,
    pub resolved_config: ResolvedConfig,
    pub wall_clock_seconds: f64,
    pub diagnostics: Diagnostics,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(config: ResolvedConfig) -> Self {
        Self {
            code_version: env!("CARGO_PKG_VERSION"),
            resolved_config: config,
            wall_clock_seconds: 0.0,
            diagnostics: Diagnostics::default(),
            outputs: Vec::new(),
        }
    }

    /// Register an already-written output file, digesting its contents.
    pub fn add_output(&mut self, path: &Path) -> anyhow::Result<()> {
        let data = std::fs::read(path)
            .with_context(|| format!("cannot digest output {}", path.display()))?;
        let digest = Sha256::digest(&data);
        self.outputs.push(OutputFile {
            name: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: hex::encode(digest),
            bytes: data.len() as u64,
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
