use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Command;
use crate::error::Result;
use crate::fsutil;
use crate::physics::RisConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(FileHash {
            path: path.to_path_buf(),
            sha256: fsutil::sha256_file(path)?,
        })
    }

    /// Hash of `base/rel`, recorded under `rel`.
    pub fn relative(base: &Path, rel: &Path) -> Result<Self> {
        Ok(FileHash {
            path: rel.to_path_buf(),
            sha256: fsutil::sha256_file(&base.join(rel))?,
        })
    }
}

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// `"defaults"` when no config file was given, otherwise its path.
    pub config_source: String,
    pub config: Option<RisConfig>,
    /// Every seed actually consumed, keyed by stage.
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

impl RunManifest {
    pub fn new(command: Command) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config_source: "none".into(),
            config: None,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn with_config(mut self, source: Option<&Path>, cfg: &RisConfig) -> Self {
        self.config_source = source.map_or_else(|| "defaults".into(), |p| p.display().to_string());
        self.config = Some(cfg.clone());
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fsutil::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        fsutil::read_json(path)
    }
}

/// `out.csv` → `out.csv.manifest.json`.
pub fn manifest_path_for_file(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn manifest_path_for_dir(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}
