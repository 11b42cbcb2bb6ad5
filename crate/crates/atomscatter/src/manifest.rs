//! Run manifests: what was run, with which fully resolved inputs, and the
//! hashes of everything it wrote.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::commands::Command;
use crate::error::{Error, Result};
use crate::io;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub seed: Option<u64>,
    pub toolkit_version: String,
    /// RFC 3339 UTC time of the run.
    pub timestamp: String,
    pub inputs: Vec<FileRecord>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileRecord>,
    #[serde(default)]
    pub diagnostics: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: Command) -> Self {
        RunManifest {
            seed: command.seed(),
            command,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            inputs: Vec::new(),
            outputs: Vec::new(),
            diagnostics: serde_json::Value::Null,
        }
    }

    pub fn record_output(&mut self, name: impl Into<String>, sha256: String) {
        self.outputs.push(FileRecord {
            path: name.into(),
            sha256,
        });
    }

    pub fn record_input(&mut self, path: &Path) -> Result<FileRecord> {
        let record = FileRecord {
            path: path.display().to_string(),
            sha256: io::hash_file(path)?,
        };
        self.inputs.push(record.clone());
        Ok(record)
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        io::write_atomic(&out_dir.join(MANIFEST_FILE), json.as_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Output records whose hashes differ from `other` (or are missing there).
    pub fn output_differences(&self, other: &RunManifest) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|rec| !other.outputs.contains(rec))
            .map(|rec| rec.path.clone())
            .collect()
    }
}
