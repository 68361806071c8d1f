//! Flat `key = value` configuration with `[section]` headers.
//!
//! Config files and command-line flags feed one table. Every entry keeps its
//! origin, so validation errors point at the offending line or flag.

use std::collections::BTreeMap;
use std::fmt;

/// Sections and the keys each one accepts.
pub const SCHEMA: &[(&str, &[&str])] = &[
    ("state", &["family", "s", "eta", "r", "epsilon", "gamma", "n", "m", "c1", "c2", "cutoff"]),
    ("criterion", &["name", "transform", "theta", "region", "displacements"]),
    ("quadrature", &["rule", "order", "tolerance"]),
    ("optimizer", &["iterations", "search_order", "refined", "bell_starts", "bell_iterations", "bell_seed"]),
    ("sweep", &["x", "x_values", "y", "y_values"]),
    ("oracle", &["checks", "optimize"]),
    ("output", &["format", "path", "timing", "gnuplot"]),
    ("run", &["workers"]),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line { file: String, line: usize },
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line { file, line } => write!(f, "{file}:{line}"),
            Origin::Flag(flag) => write!(f, "{flag}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub origin: Origin,
}

/// Error pinned to a key and to where its value came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(origin: Option<Origin>, key: &str, message: impl Into<String>) -> Self {
        Self { origin, key: key.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Some(o) => write!(f, "{o}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn known(section: &str, key: &str) -> bool {
    SCHEMA.iter().any(|(s, keys)| *s == section && keys.contains(&key))
}

/// Values keyed by `section.key`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    entries: BTreeMap<String, Entry>,
}

impl Table {
    /// Parses config text. `file` is only used in error locations.
    pub fn parse(text: &str, file: &str) -> Result<Self, ConfigError> {
        let mut table = Table::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let origin = Origin::Line { file: file.to_string(), line: idx + 1 };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new(Some(origin.clone()), line, "section header is missing `]`"))?
                    .trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::new(Some(origin), name, "unknown section"));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(Some(origin.clone()), line, "expected `key = value`"))?;
            let key = key.trim();
            let sec = section
                .as_deref()
                .ok_or_else(|| ConfigError::new(Some(origin.clone()), key, "key appears before any [section]"))?;
            if !known(sec, key) {
                return Err(ConfigError::new(Some(origin), &format!("{sec}.{key}"), "unknown key"));
            }
            let full = format!("{sec}.{key}");
            if let Some(prev) = table.entries.get(&full) {
                return Err(ConfigError::new(Some(origin), &full, format!("duplicate key, first set at {}", prev.origin)));
            }
            table.entries.insert(full, Entry { value: value.trim().to_string(), origin });
        }
        Ok(table)
    }

    /// Sets `key` from a command-line flag, overriding any file value.
    pub fn set_flag(&mut self, key: &str, value: &str, flag: &str) {
        debug_assert!(key.split_once('.').map_or(false, |(s, k)| known(s, k)), "unregistered key {key}");
        self.entries.insert(key.to_string(), Entry { value: value.to_string(), origin: Origin::Flag(flag.to_string()) });
    }

    pub fn origin(&self, key: &str) -> Option<Origin> {
        self.entries.get(key).map(|e| e.origin.clone())
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn keys_in<'a>(&'a self, section: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .keys()
            .filter_map(move |k| k.split_once('.').filter(|(s, _)| *s == section).map(|(_, key)| key))
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::new(self.origin(key), key, message)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => parse_f64(&e.value).map(Some).ok_or_else(|| self.error(key, format!("expected a finite number, got `{}`", e.value))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| self.error(key, format!("expected a non-negative integer, got `{}`", e.value))),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<u64>()
                .map(Some)
                .map_err(|_| self.error(key, format!("expected a non-negative integer, got `{}`", e.value))),
        }
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.str(key) {
            None => Ok(None),
            Some("true" | "yes" | "1") => Ok(Some(true)),
            Some("false" | "no" | "0") => Ok(Some(false)),
            Some(other) => Err(self.error(key, format!("expected true or false, got `{other}`"))),
        }
    }

    /// Comma-separated list; empty items are rejected.
    pub fn list(&self, key: &str) -> Result<Option<Vec<String>>, ConfigError> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => {
                let items: Vec<String> = v.split(',').map(|s| s.trim().to_string()).collect();
                if items.iter().any(|s| s.is_empty()) {
                    return Err(self.error(key, "empty item in comma-separated list"));
                }
                Ok(Some(items))
            }
        }
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// `start:stop:count` (inclusive), `start<:stop:count` (start excluded), or a
/// comma-separated list.
pub fn parse_axis(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (start, open) = match parts[0].trim().strip_suffix('<') {
            Some(v) => (v, true),
            None => (parts[0], false),
        };
        let start = parse_f64(start).ok_or_else(|| format!("bad range start `{}`", parts[0]))?;
        let stop = parse_f64(parts[1]).ok_or_else(|| format!("bad range stop `{}`", parts[1]))?;
        let count: usize = parts[2].trim().parse().map_err(|_| format!("bad point count `{}`", parts[2]))?;
        if count == 0 {
            return Err("point count must be positive".into());
        }
        if !(stop >= start) {
            return Err("range stop must not be below its start".into());
        }
        let values = if open {
            let h = (stop - start) / count as f64;
            (1..=count).map(|k| if k == count { stop } else { start + k as f64 * h }).collect()
        } else if count == 1 {
            vec![start]
        } else {
            let h = (stop - start) / (count - 1) as f64;
            (0..count).map(|k| if k == count - 1 { stop } else { start + k as f64 * h }).collect()
        };
        return Ok(values);
    }
    if parts.len() != 1 {
        return Err(format!("expected start:stop:count or a list, got `{s}`"));
    }
    s.split(',').map(|v| parse_f64(v).ok_or_else(|| format!("bad number `{}`", v.trim()))).collect()
}
