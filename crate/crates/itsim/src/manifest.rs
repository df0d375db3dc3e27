//! Run manifests: a provenance record written next to every artifact.
//!
//! Identical config, seed, and tool version produce byte-identical
//! manifests apart from the wall-time field, which callers strip before
//! comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SimConfig;
use crate::error::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the config's provenance block (all parameters, defaults
    /// included).
    pub config_sha256: String,
    pub tool_version: String,
    pub seed: u64,
    pub subcommand: String,
    /// Elapsed wall time in seconds; excluded from determinism checks.
    pub wall_time_s: f64,
    /// Scalar result values, formatted to full precision.
    pub summary: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &SimConfig) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config.provenance_block().as_bytes());
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self {
            config_sha256: hex,
            tool_version: TOOL_VERSION.to_owned(),
            seed: config.master_seed,
            subcommand: subcommand.to_owned(),
            wall_time_s: 0.0,
            summary: BTreeMap::new(),
        }
    }

    pub fn insert_value(&mut self, key: &str, value: f64) {
        self.summary.insert(key.to_owned(), format!("{value:.16e}"));
    }

    pub fn insert_text(&mut self, key: &str, value: &str) {
        self.summary.insert(key.to_owned(), value.to_owned());
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).expect("manifest serializes"))
    }

    /// Manifest JSON with the wall-time line removed, for byte comparison.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        copy.to_json()
    }
}

/// Strips the wall-time field from serialized manifest JSON.
pub fn strip_wall_time(json: &str) -> String {
    json.lines()
        .filter(|line| !line.trim_start().starts_with("\"wall_time_s\""))
        .collect::<Vec<_>>()
        .join("\n")
}
