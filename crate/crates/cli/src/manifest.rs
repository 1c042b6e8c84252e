//! Run manifests: what ran, with which resolved settings, and what it wrote.

use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// Every flag of the command with defaults filled in; replay parses this.
    pub config: Value,
    /// Derived settings (solver scalars, densities) for the reader.
    #[serde(default)]
    pub resolved: Value,
    /// Command-specific facts about the run.
    #[serde(default)]
    pub details: Value,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<PathBuf>,
    pub argv: Vec<String>,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// `out.csv` → `out.manifest.json`, for commands with a single output file.
pub fn beside(path: &Path) -> PathBuf {
    path.with_extension(FILE_NAME)
}

pub struct Recorder {
    command: &'static str,
    seed: Option<u64>,
    config: Value,
    started_at: String,
    pub resolved: Value,
    pub details: Value,
    pub outputs: Vec<PathBuf>,
}

impl Recorder {
    pub fn start<C: Serialize>(command: &'static str, seed: Option<u64>, config: &C) -> anyhow::Result<Self> {
        Ok(Self {
            command,
            seed,
            config: serde_json::to_value(config)?,
            started_at: now(),
            resolved: Value::Null,
            details: Value::Null,
            outputs: Vec::new(),
        })
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn finish(self, path: &Path) -> anyhow::Result<RunManifest> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            config: self.config,
            resolved: self.resolved,
            details: self.details,
            started_at: self.started_at,
            finished_at: now(),
            outputs: self.outputs,
            argv: std::env::args().collect(),
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}

pub fn read(path: &Path) -> anyhow::Result<RunManifest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
}
