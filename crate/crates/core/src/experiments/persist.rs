//! Bit-stable CSV and JSON output for experiment records.
//!
//! CSV files carry an optional `# key=value` echo of the effective config
//! (sorted by key) followed by the column header; JSON documents mirror the
//! CSV rows with the config as a header block. Identical records always
//! serialize to identical bytes.

use serde::de::DeserializeOwned;
use serde::Serialize;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}', expected csv or json")),
        }
    }
}

/// A record type with a fixed CSV schema.
pub trait CsvRecord {
    fn csv_header() -> &'static str;
    fn csv_row(&self) -> String;
}

/// Render records as a CSV document (echo lines, header, one row each).
pub fn to_csv_string<T: CsvRecord>(records: &[T], echo: &[(String, String)]) -> String {
    let mut out = String::new();
    for (key, value) in echo {
        out.push_str(&format!("# {key}={value}\n"));
    }
    out.push_str(T::csv_header());
    out.push('\n');
    for record in records {
        out.push_str(&record.csv_row());
        out.push('\n');
    }
    out
}

/// Render records as a JSON document with a config header block.
pub fn to_json_string<T: Serialize>(records: &[T], config: Option<&serde_json::Value>) -> String {
    let doc = serde_json::json!({
        "config": config,
        "records": records,
    });
    serde_json::to_string_pretty(&doc).expect("records serialize")
}

/// Write records to `path` in the requested format.
pub fn persist<T: CsvRecord + Serialize>(
    records: &[T],
    path: &Path,
    format: OutputFormat,
    config: Option<&serde_json::Value>,
) -> Result<()> {
    let body = match format {
        OutputFormat::Csv => {
            let echo = config.map(echo_pairs).unwrap_or_default();
            to_csv_string(records, &echo)
        }
        OutputFormat::Json => to_json_string(records, config),
    };
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Flatten a JSON object into sorted key=value echo pairs.
pub fn echo_pairs(config: &serde_json::Value) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    if let serde_json::Value::Object(map) = config {
        for (key, value) in map {
            let rendered = match value {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            pairs.push((key.clone(), rendered));
        }
    }
    pairs.sort();
    pairs
}

/// Read back a JSON document written by [`persist`].
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(serde_json::Value, Vec<T>)> {
    let body = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc: serde_json::Value = serde_json::from_str(&body).map_err(|e| Error::InvalidConfig(
        format!("{}: invalid json: {e}", path.display()),
    ))?;
    let config = doc.get("config").cloned().unwrap_or(serde_json::Value::Null);
    let records = doc
        .get("records")
        .cloned()
        .ok_or_else(|| Error::InvalidConfig(format!("{}: missing records", path.display())))?;
    let records: Vec<T> = serde_json::from_value(records).map_err(|e| {
        Error::InvalidConfig(format!("{}: bad records: {e}", path.display()))
    })?;
    Ok((config, records))
}
