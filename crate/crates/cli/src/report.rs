//! Report envelope and artifact paths.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const TOOL: &str = "julialab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "JULIALAB_OUT_DIR";

/// Header shared by every JSON artifact. Rerunning `command` with `config`
/// reproduces `report`.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: RunConfig,
    pub fingerprint: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    pub report: R,
}

impl<'a, R: Serialize> Envelope<'a, R> {
    pub fn new(command: &'a str, config: &RunConfig, fingerprint: Option<String>, report: R) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            config: config.for_report(),
            fingerprint,
            seeds: BTreeMap::new(),
            report,
        }
    }

    pub fn seed(mut self, name: &str, seed: u64) -> Self {
        self.seeds.insert(name.to_string(), seed);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, self.to_json()?.as_bytes())
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// `--out` if given, else `default_name` inside `$JULIALAB_OUT_DIR` (or `.`).
pub fn output_path(config: &RunConfig, default_name: &str) -> PathBuf {
    match &config.out {
        Some(p) => p.clone(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
            .join(default_name),
    }
}

/// JSON companion of a CSV or PNG artifact.
pub fn sidecar_path(main: &Path) -> PathBuf {
    let p = main.with_extension("json");
    if p == main {
        main.with_extension("report.json")
    } else {
        p
    }
}
