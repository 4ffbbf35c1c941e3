use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rpst_walk::length_dist::DistKind;
use serde::{Deserialize, Serialize};

/// Values read from `--config`. Any field may be omitted; command-line flags
/// take precedence over everything here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub steps: Option<u32>,
    pub max_len: Option<u32>,
    pub dist: Option<DistKind>,
    pub paths: Option<usize>,
    pub scaled: Option<bool>,
    pub rho: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub base: Option<f64>,
    pub n: Option<u32>,
    pub count: Option<usize>,
    pub workers: Option<usize>,
    pub bins: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Everything needed to rerun a command and get the same bytes back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub subcommand: String,
    /// Effective parameters after merging flags, config file and defaults.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub files: Vec<String>,
    pub duration_secs: f64,
}
