//! `key=value` config files merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};

/// A problem with the settings themselves; maps to the usage exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Settings from a config file, plus the record of every value actually used.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut file = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("line {}: expected key=value", i + 1)))?;
            let key = key.trim().replace('_', "-");
            if file.insert(key.clone(), value.trim().to_owned()).is_some() {
                return Err(usage(format!("line {}: duplicate key {key}", i + 1)));
            }
        }
        Ok(Resolver {
            file,
            resolved: Vec::new(),
        })
    }

    /// Flag value if given, else the config file entry, else `default`.
    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let from_file = self.file.remove(key);
        let value = match (flag, from_file) {
            (Some(v), _) => Some(v),
            (None, Some(s)) => Some(
                s.parse::<T>()
                    .map_err(|e| usage(format!("config key {key}: {e}")))?,
            ),
            (None, None) => default,
        };
        if let Some(v) = &value {
            self.resolved.push((key.to_owned(), v.to_string()));
        }
        Ok(value)
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.value(key, flag, None)?
            .ok_or_else(|| usage(format!("missing required setting --{key}")))
    }

    pub fn with_default<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        Ok(self.value(key, flag, Some(default))?.expect("default given"))
    }

    /// Boolean switch: set by the flag, or by `true`/`false` in the file.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        self.with_default(key, flag.then_some(true), false)
    }

    /// Record a derived value so that it shows up in the echo.
    pub fn note(&mut self, key: &str, value: impl Display) {
        self.resolved.push((key.to_owned(), value.to_string()));
    }

    /// Fails on config entries that no setting consumed.
    pub fn finish(&self) -> Result<()> {
        if let Some(key) = self.file.keys().next() {
            return Err(usage(format!("unknown config key {key}")));
        }
        Ok(())
    }

    pub fn echo(&self, command: &str) -> String {
        let mut out = format!("command={command}\n");
        for (k, v) in &self.resolved {
            out += &format!("{k}={v}\n");
        }
        out
    }
}
