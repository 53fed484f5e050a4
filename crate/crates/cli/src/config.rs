//! Key-value configuration with flag > file > environment precedence.
//!
//! The file format is one `key = value` pair per line; `#` starts a
//! comment. Keys mirror the long flags of each subcommand: paths
//! (`concepts`, `cells`, `dataset`, `machine`, `scores`, `triplets`,
//! `votes`, `report`, `out_dir`, `template`, `cache`), oracle settings
//! (`endpoint`, `token`, `retries`, `backoff_ms`, `max_new_tokens`,
//! `concurrency`, `unparseable`), and analysis settings (`seed`,
//! `scope`, `scopes`, `thresholds`, `correction`, `coverage`,
//! `combine_mode`, `disagreement_tau`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("config line {} is not `key = value`", i + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Resolved settings for one command invocation, kept as ordered
/// key-value pairs so `--print-config` output is deterministic.
#[derive(Debug, Default)]
pub struct Resolved {
    entries: BTreeMap<String, String>,
}

impl Resolved {
    pub fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn put_opt(&mut self, key: &str, value: Option<impl std::fmt::Display>) {
        match value {
            Some(v) => self.put(key, v),
            None => self.put(key, "<unset>"),
        }
    }

    /// Prints `key = value` lines and reports whether the caller should
    /// stop without executing.
    pub fn print_and_stop(&self, print_config: bool) -> bool {
        if print_config {
            for (k, v) in &self.entries {
                println!("{k} = {v}");
            }
        }
        print_config
    }
}

/// Flag value, else config value, else environment variable.
pub fn resolve_string(
    flag: Option<String>,
    config: &FileConfig,
    key: &str,
    env_var: Option<&str>,
) -> Option<String> {
    flag.or_else(|| config.get(key).map(str::to_string))
        .or_else(|| env_var.and_then(|v| std::env::var(v).ok()))
}

pub fn resolve_path(
    flag: Option<PathBuf>,
    config: &FileConfig,
    key: &str,
) -> Option<PathBuf> {
    flag.or_else(|| config.get(key).map(PathBuf::from))
}

pub fn resolve_parsed<T: std::str::FromStr>(
    flag: Option<T>,
    config: &FileConfig,
    key: &str,
    default: T,
) -> anyhow::Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match config.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|_| anyhow::anyhow!("config key `{key}` has unparseable value `{raw}`")),
        None => Ok(default),
    }
}

/// A path that must already exist; the error names it.
pub fn require_file(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.is_file() {
        anyhow::bail!("{what} file not found: {}", path.display());
    }
    Ok(())
}

pub fn require_some<T>(value: Option<T>, what: &str, key: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| anyhow::anyhow!("{what} not given (flag --{key} or config `{key}`)"))
}
