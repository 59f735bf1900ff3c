//! Flat `key = value` config files with `[section]` headers, one section per
//! subcommand. `#` starts a comment. Flags always override file values.

use super::CliError;
use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug)]
pub struct ConfigFile {
    values: HashMap<(String, String), String>,
    path: String,
}

impl ConfigFile {
    pub fn empty() -> Self {
        ConfigFile { values: HashMap::new(), path: String::new() }
    }

    pub fn load(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(Path::new(path))
            .map_err(|e| CliError(format!("cannot read config '{path}': {e}")))?;
        let mut values = HashMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return Err(CliError(format!("{path}:{lineno}: unterminated section header")));
                };
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError(format!(
                    "{path}:{lineno}: expected 'key = value', got '{line}'"
                )));
            };
            if section.is_empty() {
                return Err(CliError(format!(
                    "{path}:{lineno}: key '{}' appears before any [section]",
                    key.trim()
                )));
            }
            values.insert(
                (section.clone(), key.trim().to_string()),
                value.trim().to_string(),
            );
        }
        Ok(ConfigFile { values, path: path.to_string() })
    }

    pub fn load_opt(path: &Option<String>) -> Result<Self, CliError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::empty()),
        }
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.values.get(&(section.to_string(), key.to_string())).map(String::as_str)
    }

    /// Flag value if present, else the parsed config value, else None.
    pub fn resolve<T: FromStr + Clone>(
        &self,
        flag: &Option<T>,
        section: &str,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.raw(section, key) {
            Some(text) => text.parse::<T>().map(Some).map_err(|_| {
                CliError(format!(
                    "{}: cannot parse [{section}] {key} = '{text}'",
                    self.path
                ))
            }),
            None => Ok(None),
        }
    }

    /// Like `resolve`, but the setting must be present somewhere.
    pub fn require<T: FromStr + Clone>(
        &self,
        flag: &Option<T>,
        section: &str,
        key: &str,
    ) -> Result<T, CliError> {
        self.resolve(flag, section, key)?.ok_or_else(|| {
            CliError(format!("missing required --{key} (or [{section}] {key} in a config file)"))
        })
    }
}
