//! Run directories and the JSON manifest written into each of them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        Ok(Self { path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(&bytes)) })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub library_version: String,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Resolved configuration after flags, config file and defaults.
    pub config: Value,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// `ok`, or the error message of a failed run.
    pub status: String,
    /// Stage counts worth keeping next to the configuration.
    pub audit: Option<Value>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// A fresh output directory that collects what the command writes.
pub struct RunDir {
    pub root: PathBuf,
    manifest: RunManifest,
}

impl RunDir {
    /// Creates `root`, which must not exist yet or be empty.
    pub fn create(root: PathBuf, command: &str, seed: u64, threads: Option<usize>) -> Result<Self, CliError> {
        if root.exists() {
            let mut entries = fs::read_dir(&root)?;
            if entries.next().is_some() {
                return Err(CliError::invalid(format!("output directory {} is not empty", root.display())));
            }
        } else {
            fs::create_dir_all(&root)?;
        }
        Ok(Self {
            root,
            manifest: RunManifest {
                command: command.to_string(),
                library_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                threads,
                config: Value::Null,
                inputs: Vec::new(),
                outputs: Vec::new(),
                started_unix: now(),
                finished_unix: 0,
                status: String::new(),
                audit: None,
            },
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn set_config<T: Serialize>(&mut self, cfg: &T) -> Result<(), CliError> {
        self.manifest.config = serde_json::to_value(cfg)?;
        Ok(())
    }

    pub fn set_audit(&mut self, audit: Value) {
        self.manifest.audit = Some(audit);
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.manifest.inputs.push(FileRecord::of(path)?);
        Ok(())
    }

    /// Records a file the command has just written.
    pub fn output(&mut self, name: &str) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        self.manifest.outputs.push(FileRecord::of(&p)?);
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        fs::write(self.path(name), serde_json::to_string_pretty(value)?)?;
        self.output(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        fs::write(self.path(name), text)?;
        self.output(name)
    }

    /// Writes the manifest with the outcome of the run.
    pub fn finish(mut self, outcome: &Result<(), CliError>) -> Result<(), CliError> {
        self.manifest.finished_unix = now();
        self.manifest.status = match outcome {
            Ok(()) => "ok".into(),
            Err(e) => e.to_string(),
        };
        fs::write(self.path(MANIFEST_FILE), serde_json::to_string_pretty(&self.manifest)?)?;
        Ok(())
    }
}

/// Reads a command configuration from JSON. A run manifest is accepted as
/// well, in which case its resolved configuration and seed are returned.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<(T, Option<u64>), CliError> {
    let Some(path) = path else {
        return Ok((T::default(), None));
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)?;
    if let Ok(m) = serde_json::from_value::<RunManifest>(value.clone()) {
        let cfg = serde_json::from_value(m.config)?;
        return Ok((cfg, Some(m.seed)));
    }
    Ok((serde_json::from_value(value)?, None))
}
