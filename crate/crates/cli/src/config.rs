//! Flat key-value config files with one section per subcommand.
//!
//! Grammar: blank lines and `#` comments are skipped; `[section]` opens the
//! block for one subcommand; every other line is `key = value` with keys
//! named after the long command-line flags. Flags always override file
//! values. Unknown keys in the active section are usage errors.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Default)]
pub struct FileConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, String> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config '{}': {e}", path.display()))?;
        Self::parse(&body).map_err(|e| format!("config '{}': {e}", path.display()))
    }

    pub fn parse(body: &str) -> Result<FileConfig, String> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| format!("line {}: unterminated section header", idx + 1))?;
                current = Some(name.trim().to_string());
                sections.entry(name.trim().to_string()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected 'key = value'", idx + 1))?;
            let section = current
                .clone()
                .ok_or_else(|| format!("line {}: key outside any [section]", idx + 1))?;
            sections
                .entry(section)
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { sections })
    }

    /// Key-value pairs of one section (empty if the section is absent).
    pub fn section(&self, name: &str) -> BTreeMap<String, String> {
        self.sections.get(name).cloned().unwrap_or_default()
    }
}

/// Consume `key` from a section map, parsing it on demand.
pub fn take<T: std::str::FromStr>(
    section: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    match section.remove(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| format!("config key '{key}': {e}")),
    }
}

/// After merging, any leftover key is unknown.
pub fn reject_unknown(section: &BTreeMap<String, String>, context: &str) -> Result<(), String> {
    if let Some(key) = section.keys().next() {
        return Err(format!("unknown config key '{key}' in [{context}]"));
    }
    Ok(())
}
