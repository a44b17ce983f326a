//! Flat `key: value` text documents used for configs and layouts.
//!
//! One entry per line, `#` starts a comment line, keys may repeat (layouts
//! use a repeated `marker` key). Floats are written with the shortest
//! representation that parses back to the same bits.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDoc {
    entries: Vec<(String, String, usize)>,
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string(), 0));
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(idx + 1, format!("expected `key: value`, got {line:?}")))?;
            entries.push((k.trim().to_string(), v.trim().to_string(), idx + 1));
        }
        Ok(KvDoc { entries })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v, _) in &self.entries {
            let _ = writeln!(s, "{k}: {v}");
        }
        s
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|(k, _, _)| k == key)
    }

    pub fn raw(&self, key: &str) -> Result<(&str, usize)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
            .ok_or_else(|| Error::parse(0, format!("missing key `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (v, line) = self.raw(key)?;
        v.parse()
            .map_err(|e| Error::parse(line, format!("key `{key}`: {e}")))
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if self.has(key) {
            self.get(key).map(Some)
        } else {
            Ok(None)
        }
    }

    /// All values for a repeated key, with their line numbers.
    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = (&'a str, usize)> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
    }

    pub fn check_schema(&self, supported: u32) -> Result<()> {
        let v: u32 = self.get("schema_version")?;
        if v != supported {
            return Err(Error::SchemaVersion(v));
        }
        Ok(())
    }
}

/// Parses whitespace-separated `name=value` attributes of a record line.
pub fn attrs(record: &str) -> Vec<(&str, &str)> {
    record
        .split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .collect()
}

pub fn parse_floats(s: &str, n: usize, line: usize) -> Result<Vec<f64>> {
    let out: std::result::Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let out = out.map_err(|e| Error::parse(line, format!("bad number list {s:?}: {e}")))?;
    if n != 0 && out.len() != n {
        return Err(Error::parse(line, format!("expected {n} numbers, got {}", out.len())));
    }
    Ok(out)
}

pub fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
