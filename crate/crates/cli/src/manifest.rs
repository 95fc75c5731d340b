//! Run manifests: what produced a set of output files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical form of `config`.
    pub config_hash: String,
    pub artifact_version: String,
    pub master_seed: u64,
    pub wall_time_seconds: f64,
    pub outputs: Vec<PathBuf>,
    /// Effective configuration, after command-line overrides.
    pub config: Value,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: Value, master_seed: u64) -> Self {
        Self {
            command: command.into(),
            config_hash: config_hash(&config),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            wall_time_seconds: 0.0,
            outputs: Vec::new(),
            config,
        }
    }

    pub fn write(&self, out_dir: &Path) -> CliResult<PathBuf> {
        let path = out_dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// JSON with object keys sorted at every level and no whitespace.
pub fn canonical_json(v: &Value) -> String {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let body: Vec<String> = keys
                .into_iter()
                .map(|k| format!("{}:{}", Value::String(k.clone()), canonical_json(&map[k])))
                .collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(items) => format!("[{}]", items.iter().map(canonical_json).collect::<Vec<_>>().join(",")),
        scalar => scalar.to_string(),
    }
}

pub fn config_hash(v: &Value) -> String {
    hex::encode(Sha256::digest(canonical_json(v).as_bytes()))
}
