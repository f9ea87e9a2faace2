//! Flat `key: value` run manifests.
//!
//! Reals are written with `Display`, which is the shortest string that parses
//! back to the same `f64`.

use std::fmt::Display;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_real(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Entries other than `wall_time_s`, for determinism checks.
    pub fn without_timing(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter(|(k, _)| k != "wall_time_s")
            .cloned()
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k}: {v}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut entries = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once(": ")
                .ok_or_else(|| Error::Config(format!("manifest line without `: `: {line}")))?;
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Self { entries })
    }
}
