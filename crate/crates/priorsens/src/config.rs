//! `key = value` configuration files. Keys mirror the long flag names.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

pub const KEYS: &[&str] = &[
    "out",
    "epsilon",
    "n-angles",
    "family",
    "gamma0",
    "posterior",
    "log-scale",
    "h",
    "mu",
    "data",
    "window",
    "kappa",
    "prior",
    "engine",
    "grid-points",
];

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    path: PathBuf,
    /// Value and line number per key.
    values: BTreeMap<String, (String, usize)>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(path, &text)
    }

    /// Blank lines and lines starting with `#` are ignored; a repeated key is an error.
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let err = |line: usize, message: String| CliError::Config {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected key = value, got {content:?}")))?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(err(line, format!("unknown key {key:?}")));
            }
            let value = value.trim().trim_matches('"').to_string();
            if values.insert(key.clone(), (value, line)).is_some() {
                return Err(err(line, format!("key {key:?} set twice")));
            }
        }
        Ok(ConfigFile {
            path: path.to_path_buf(),
            values,
        })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        debug_assert!(KEYS.contains(&key), "{key}");
        match self.values.get(key) {
            None => Ok(None),
            Some((value, line)) => value.parse().map(Some).map_err(|e| CliError::Config {
                path: self.path.clone(),
                line: *line,
                message: format!("{key}: {e}"),
            }),
        }
    }
}
