//! Flat `key = value` configuration files.
//!
//! `#` starts a comment; blank lines are ignored; keys may appear once.
//! Whether a key is known is decided by the consumer (see
//! [`crate::scenario`]), which rejects anything it did not read.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigFile {
    entries: Vec<(String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Config(format!("line {}: malformed key `{key}`", n + 1)));
            }
            if cfg.get(key).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
            cfg.entries.push((key.to_string(), value.trim().to_string()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Inserts or replaces a key.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    /// `self` with every entry of `over` applied on top.
    pub fn overlay(&self, over: &ConfigFile) -> ConfigFile {
        let mut out = self.clone();
        for (k, v) in &over.entries {
            out.set(k, v.clone());
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Typed access that remembers which keys were read.
#[derive(Debug)]
pub struct Reader<'a> {
    cfg: &'a ConfigFile,
    used: BTreeSet<String>,
}

impl<'a> Reader<'a> {
    pub fn new(cfg: &'a ConfigFile) -> Self {
        Reader { cfg, used: BTreeSet::new() }
    }

    pub fn raw(&mut self, key: &str) -> Option<&'a str> {
        self.used.insert(key.to_string());
        self.cfg.get(key)
    }

    pub fn parse<V: FromStr>(&mut self, key: &str) -> Result<Option<V>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{s}`"))),
        }
    }

    pub fn or<V: FromStr>(&mut self, key: &str, default: V) -> Result<V> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<V: FromStr>(&mut self, key: &str) -> Result<Option<Vec<V>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .split(',')
                .map(|x| {
                    let x = x.trim();
                    x.parse()
                        .map_err(|_| Error::Config(format!("key `{key}`: cannot parse list entry `{x}`")))
                })
                .collect::<Result<Vec<V>>>()
                .map(Some),
        }
    }

    /// Errors on the first key that was never read.
    pub fn finish(self) -> Result<()> {
        match self.cfg.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(Error::Config(format!("unknown configuration key `{k}`"))),
            None => Ok(()),
        }
    }
}
