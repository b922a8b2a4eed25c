//! Home directory and the optional config file.
//!
//! `STRESSBENCH_HOME` (default `~/.stressbench`) holds `config.toml` and
//! the registry journal `registry.jsonl`. The config file is flat
//! `key = value` TOML:
//!
//! ```toml
//! store = "/var/lib/stressbench/registry.jsonl"
//! addr = "0.0.0.0:8080"
//!
//! [tokens]
//! "s3cret-token" = "journalist-desk"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use stressbench::{Error, Result};

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub store: Option<PathBuf>,
    pub addr: Option<String>,
    /// Bearer token to stakeholder id.
    #[serde(default)]
    pub tokens: BTreeMap<String, String>,
}

pub fn home() -> PathBuf {
    if let Some(dir) = std::env::var_os("STRESSBENCH_HOME") {
        return PathBuf::from(dir);
    }
    std::env::var_os("HOME")
        .map(|h| PathBuf::from(h).join(".stressbench"))
        .unwrap_or_else(|| PathBuf::from(".stressbench"))
}

impl Config {
    /// Reads `explicit` if given (it must exist), else `$STRESSBENCH_HOME/config.toml`
    /// if present, else defaults.
    pub fn load(explicit: Option<&Path>) -> Result<Self> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => {
                let p = home().join("config.toml");
                if !p.exists() {
                    return Ok(Config::default());
                }
                p
            }
        };
        let text = crate::files::read_text(&path)?;
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn store_path(&self) -> PathBuf {
        self.store
            .clone()
            .unwrap_or_else(|| home().join("registry.jsonl"))
    }
}
