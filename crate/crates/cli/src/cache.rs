//! Run records and the content-addressed result cache.
//!
//! A record is stored as `<cache dir>/<sha256 key>.json`. The key covers the
//! code text, the command, its normalized parameters, the solver settings and
//! the tool's major version, so a hit can be returned without recomputing.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const RECORD_SCHEMA: &str = "gaugegap/run-record/v1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub tol: f64,
    pub seed: u64,
    pub max_matvecs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub code_sha256: String,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub solver: SolverParams,
    pub payload: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn major_version() -> &'static str {
    TOOL_VERSION.split('.').next().unwrap_or("0")
}

/// Cache key of a run; independent of wall time and output destination.
pub fn cache_key(code_text: &str, command: &str, params: &BTreeMap<String, Value>, solver: &SolverParams) -> String {
    let material = serde_json::json!({
        "code": code_text,
        "command": command,
        "params": params,
        "solver": solver,
        "major": major_version(),
    });
    sha256_hex(material.to_string().as_bytes())
}

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    /// `dir = None` disables caching.
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get(&self, key: &str) -> Option<RunRecord> {
        let text = std::fs::read_to_string(self.path(key)?).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, key: &str, record: &RunRecord) -> Result<(), CliError> {
        let Some(path) = self.path(key) else { return Ok(()) };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        // write-then-rename so concurrent readers never see a partial file
        let tmp = path.with_extension(format!("json.{}.tmp", std::process::id()));
        std::fs::write(&tmp, serde_json::to_string_pretty(record)?)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Returns the cached record for this run, or computes, stores and
    /// returns a fresh one. The boolean is true on a cache hit.
    pub fn run(
        &self,
        code_text: &str,
        command: &str,
        params: BTreeMap<String, Value>,
        solver: SolverParams,
        compute: impl FnOnce() -> Result<Value, CliError>,
    ) -> Result<(RunRecord, bool), CliError> {
        let key = cache_key(code_text, command, &params, &solver);
        if let Some(hit) = self.get(&key) {
            return Ok((hit, true));
        }
        let start = Instant::now();
        let payload = compute()?;
        let record = RunRecord {
            schema: RECORD_SCHEMA.to_string(),
            command: command.to_string(),
            params,
            code_sha256: sha256_hex(code_text.as_bytes()),
            tool_version: TOOL_VERSION.to_string(),
            wall_time_s: start.elapsed().as_secs_f64(),
            solver,
            payload,
        };
        self.put(&key, &record)?;
        Ok((record, false))
    }
}
