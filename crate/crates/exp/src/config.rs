//! Flat experiment config files: UTF-8 `key = value` lines grouped under
//! `[section]` headers, with `#` comments. Unknown keys are a hard error so
//! typos cannot silently fall back to defaults.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};

/// Parsed `(section, key) -> value` entries.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: Vec<Entry>,
}

#[derive(Clone, Debug)]
struct Entry {
    section: String,
    key: String,
    value: String,
    consumed: bool,
}

const SECTIONS: &[&str] = &["chain", "kernel", "potential", "semimetric", "sweep"];

/// Parses config text, rejecting malformed lines, unknown sections and
/// duplicate keys.
pub fn parse_config(text: &str) -> Result<RawConfig> {
    let mut entries: Vec<Entry> = Vec::new();
    let mut section = String::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                bail!("line {}: unknown section [{name}]", lineno + 1);
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, got `{line}`", lineno + 1);
        };
        if section.is_empty() {
            bail!("line {}: key outside any [section]", lineno + 1);
        }
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if entries.iter().any(|e| e.section == section && e.key == key) {
            bail!("line {}: duplicate key {section}.{key}", lineno + 1);
        }
        entries.push(Entry {
            section: section.clone(),
            key,
            value,
            consumed: false,
        });
    }
    Ok(RawConfig { entries })
}

/// Reads a config file from disk.
pub fn load_config(path: &std::path::Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl RawConfig {
    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        for e in self.entries.iter_mut() {
            if e.section == section && e.key == key {
                e.consumed = true;
                return Some(e.value.clone());
            }
        }
        None
    }

    /// Overrides `into` when `section.key` is present.
    pub fn read_f64(&mut self, section: &str, key: &str, into: &mut f64) -> Result<()> {
        if let Some(v) = self.take(section, key) {
            *into = v
                .parse::<f64>()
                .with_context(|| format!("{section}.{key}: not a number: `{v}`"))?;
        }
        Ok(())
    }

    /// Overrides `into` when `section.key` is present.
    pub fn read_usize(&mut self, section: &str, key: &str, into: &mut usize) -> Result<()> {
        if let Some(v) = self.take(section, key) {
            *into = v
                .parse::<usize>()
                .with_context(|| format!("{section}.{key}: not an integer: `{v}`"))?;
        }
        Ok(())
    }

    /// Overrides `into` when `section.key` is present.
    pub fn read_u64(&mut self, section: &str, key: &str, into: &mut u64) -> Result<()> {
        if let Some(v) = self.take(section, key) {
            *into = v
                .parse::<u64>()
                .with_context(|| format!("{section}.{key}: not an integer: `{v}`"))?;
        }
        Ok(())
    }

    /// Overrides `into` when `section.key` is present.
    pub fn read_bool(&mut self, section: &str, key: &str, into: &mut bool) -> Result<()> {
        if let Some(v) = self.take(section, key) {
            *into = match v.as_str() {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                other => bail!("{section}.{key}: not a boolean: `{other}`"),
            };
        }
        Ok(())
    }

    /// Overrides `into` when `section.key` is present.
    pub fn read_string(&mut self, section: &str, key: &str, into: &mut String) -> Result<()> {
        if let Some(v) = self.take(section, key) {
            *into = v;
        }
        Ok(())
    }

    /// Overrides `into` with a comma-separated list of numbers.
    pub fn read_f64_list(&mut self, section: &str, key: &str, into: &mut Vec<f64>) -> Result<()> {
        if let Some(v) = self.take(section, key) {
            let parsed: Result<Vec<f64>> = v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .with_context(|| format!("{section}.{key}: bad entry `{s}`"))
                })
                .collect();
            *into = parsed?;
            if into.is_empty() {
                bail!("{section}.{key}: empty list");
            }
        }
        Ok(())
    }

    /// Overrides `into` with a comma-separated list of integers.
    pub fn read_usize_list(
        &mut self,
        section: &str,
        key: &str,
        into: &mut Vec<usize>,
    ) -> Result<()> {
        if let Some(v) = self.take(section, key) {
            let parsed: Result<Vec<usize>> = v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .with_context(|| format!("{section}.{key}: bad entry `{s}`"))
                })
                .collect();
            *into = parsed?;
            if into.is_empty() {
                bail!("{section}.{key}: empty list");
            }
        }
        Ok(())
    }

    /// Errors on any key no experiment consumed: unknown keys are hard
    /// errors.
    pub fn finish(&self) -> Result<()> {
        let leftover: Vec<String> = self
            .entries
            .iter()
            .filter(|e| !e.consumed)
            .map(|e| format!("{}.{}", e.section, e.key))
            .collect();
        if !leftover.is_empty() {
            bail!("unknown config keys: {}", leftover.join(", "));
        }
        Ok(())
    }
}

/// Renders a resolved-config map (every effective key, defaults included)
/// for summary files and `--help` text.
pub fn format_resolved(entries: &BTreeMap<String, String>) -> String {
    entries
        .iter()
        .map(|(k, v)| format!("  {k} = {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}
