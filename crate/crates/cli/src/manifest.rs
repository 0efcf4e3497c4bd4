//! Run manifests: one JSON record per invocation with resolved parameters,
//! content hashes of every input and output, and wall time.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// What a command did, handed back to the driver for reporting.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Resolved parameters, defaults included.
    pub params: Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Numeric results, printed with `--json`.
    pub result: Value,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub params: Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub result: Value,
    pub wall_time_seconds: f64,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hashes each file, adding the JSON sidecar of matrix files when present.
fn hash_all(paths: &[PathBuf]) -> anyhow::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for p in paths {
        out.insert(p.display().to_string(), sha256_file(p)?);
        let side = sidecar(p);
        if side.is_file() && !paths.contains(&side) {
            out.insert(side.display().to_string(), sha256_file(&side)?);
        }
    }
    Ok(out)
}

pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

impl RunManifest {
    pub fn build(command: &str, outcome: &Outcome, wall_time_seconds: f64) -> anyhow::Result<Self> {
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            params: outcome.params.clone(),
            seeds: outcome.seeds.clone(),
            inputs: hash_all(&outcome.inputs)?,
            outputs: hash_all(&outcome.outputs)?,
            result: outcome.result.clone(),
            wall_time_seconds,
        })
    }

    /// Default location: next to the first output, else in the working
    /// directory.
    pub fn default_path(command: &str, outcome: &Outcome) -> PathBuf {
        match outcome.outputs.first() {
            Some(first) => {
                let mut s = first.as_os_str().to_owned();
                s.push(".run.json");
                PathBuf::from(s)
            }
            None => PathBuf::from(format!("qpga-{command}.run.json")),
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing manifest {}", path.display()))
    }
}
