//! Scenario runner for the nullform laboratory.
//!
//! A run parses a scenario file, executes its pipeline and writes every artifact into
//! `<root>/<name>-<hash8>`, where the hash is the SHA-256 of the canonical JSON form of the
//! parsed scenario. `summary.json` is deterministic; wall-clock times go to stdout only.

pub mod compare;
pub mod config;
mod pipelines;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{Pipeline, Scenario};

pub const SUMMARY: &str = "summary.json";
pub const DEFAULT_ROOT: &str = "nullform-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Core(#[from] nullform_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Compare(String),
}

impl CliError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

/// Output root: `--out`, else `NULLFORM_OUT`, else `./nullform-out`.
pub fn output_root(cli: Option<&Path>) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    match std::env::var_os("NULLFORM_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_ROOT),
    }
}

pub fn config_hash(s: &Scenario) -> String {
    let canonical = serde_json::to_vec(&serde_json::to_value(s).expect("scenario serializes")).expect("json");
    Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunOutcome {
    pub dir: PathBuf,
    /// The directory already held a complete run of this exact config.
    pub reused: bool,
    pub summary: Value,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config { field: "config".into(), message: format!("cannot read {}: {e}", path.display()) })?;
    Scenario::parse(&text)
}

/// Runs a scenario unless `root` already holds a finished run with the same hash (or `force`).
pub fn run(scenario: &Scenario, root: &Path, force: bool) -> Result<RunOutcome, CliError> {
    let hash = config_hash(scenario);
    let dir = root.join(format!("{}-{}", scenario.name, &hash[..8]));
    let summary_path = dir.join(SUMMARY);
    if !force && summary_path.exists() {
        if let Ok(v) = serde_json::from_str::<Value>(&fs::read_to_string(&summary_path)?) {
            if v.get("config_hash").and_then(Value::as_str) == Some(hash.as_str()) {
                return Ok(RunOutcome { dir, reused: true, summary: v });
            }
        }
    }
    fs::create_dir_all(&dir)?;
    // a partial run must not look finished
    let _ = fs::remove_file(&summary_path);
    fs::write(dir.join("scenario.toml"), toml::to_string(scenario).map_err(|e| CliError::Compare(e.to_string()))?)?;
    let ctx = pipelines::Context { dir: &dir, hash: &hash };
    let result = pipelines::dispatch(scenario, &ctx)?;
    let mut summary = serde_json::Map::new();
    summary.insert("name".into(), Value::String(scenario.name.clone()));
    summary.insert("pipeline".into(), serde_json::to_value(scenario.pipeline)?);
    summary.insert("config_hash".into(), Value::String(hash.clone()));
    summary.insert("config".into(), serde_json::to_value(scenario)?);
    summary.insert("files".into(), serde_json::to_value(&result.files)?);
    summary.insert("pass".into(), Value::Bool(result.pass));
    summary.insert("results".into(), result.results);
    let summary = Value::Object(summary);
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&summary_path, text)?;
    Ok(RunOutcome { dir, reused: false, summary })
}

/// Lines for `list-catalog`.
pub fn catalog_listing() -> Vec<String> {
    let mut out = vec!["potentials:".to_string()];
    for (k, d) in nullform_core::potential::catalog_keys() {
        out.push(format!("  {k:<28} {d}"));
    }
    out.push("profiles:".into());
    for (k, d) in config::PROFILE_KINDS {
        out.push(format!("  {k:<28} {d}"));
    }
    out.push("pipelines:".into());
    out.push("  forward ansatz residual picard energy recover certify".into());
    out
}
