//! Run manifests. The manifest names every output of a run and is written
//! before the first of them.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Config;

pub const MANIFEST_FILE: &str = "manifest.json";
/// When set, the process aborts right after the manifest is written.
pub const CRASH_ENV: &str = "CHQ_CRASH_AFTER_MANIFEST";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub half_width: f64,
    pub n: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub command: String,
    pub grid: GridParams,
    pub potential_spec: String,
    pub symmetry: String,
    pub seed: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(cfg: &Config, command: &str, outputs: Vec<String>) -> Self {
        Self {
            config_hash: cfg.hash(),
            command: command.to_string(),
            grid: GridParams { half_width: cfg.grid.half_width(), n: cfg.grid.n(), spacing: cfg.grid.spacing() },
            potential_spec: cfg.potential.to_string(),
            symmetry: cfg.action.to_string(),
            seed: cfg.solve.seed,
            outputs,
        }
    }

    /// Writes `manifest.json` into `dir`, creating it, then honours [`CRASH_ENV`].
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(&path, text + "\n")?;
        if std::env::var_os(CRASH_ENV).is_some() {
            std::process::abort();
        }
        Ok(path)
    }

    pub fn read(dir: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        serde_json::from_str(&text).map_err(io::Error::other)
    }
}
