//! Versioned JSON documents, RFC-4180 CSV tables and their content hashes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

/// Version of the JSON document layout.
pub const SCHEMA_VERSION: u32 = 1;

/// A plain data table; every cell is already formatted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// CSV bytes with a trailing `config_hash` column on every row.
    pub fn to_csv(&self, config_hash: &str) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let out = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(self.header.iter().map(String::as_str).chain(["config_hash"])).map_err(out)?;
        for r in &self.rows {
            w.write_record(r.iter().map(String::as_str).chain([config_hash])).map_err(out)?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

/// Shortest round-trip representation of a float.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Hash of the canonical form of the resolved configuration: compact JSON with sorted keys.
pub fn config_hash(cfg: &RunConfig) -> Result<String, CliError> {
    let v = serde_json::to_value(cfg).map_err(|e| CliError::Output(e.to_string()))?;
    Ok(sha256_hex(&json_bytes(&v)?))
}

/// The JSON summary written by every command.
#[derive(Debug, Serialize)]
pub struct Document<'a> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub config_hash: &'a str,
    pub passed: bool,
    pub checks: &'a BTreeMap<String, bool>,
    pub result: &'a serde_json::Value,
    /// SHA-256 of the CSV bytes, present when a table was written.
    pub csv_sha256: Option<String>,
    /// SHA-256 over command, config hash, checks, result and CSV hash.
    pub content_hash: String,
}

/// Builds the document and the CSV bytes for one run.
pub fn render(
    command: &str,
    cfg: &RunConfig,
    checks: &BTreeMap<String, bool>,
    result: &serde_json::Value,
    table: &Table,
) -> Result<(String, Vec<u8>), CliError> {
    let hash = config_hash(cfg)?;
    let csv = table.to_csv(&hash)?;
    let csv_sha = sha256_hex(&csv);
    let mut h = Sha256::new();
    for part in [command.as_bytes(), hash.as_bytes(), &json_bytes(checks)?, &json_bytes(result)?, csv_sha.as_bytes()] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    let content_hash = hex(&h.finalize());
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        tool: "cfslab",
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        config: cfg,
        config_hash: &hash,
        passed: checks.values().all(|c| *c),
        checks,
        result,
        csv_sha256: Some(csv_sha),
        content_hash,
    };
    let mut json = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Output(e.to_string()))?;
    json.push('\n');
    Ok((json, csv))
}

/// Compact JSON bytes.
fn json_bytes<T: Serialize + ?Sized>(v: &T) -> Result<Vec<u8>, CliError> {
    serde_json::to_vec(v).map_err(|e| CliError::Output(e.to_string()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_hash_column() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["x,y".into(), "say \"hi\"".into()]);
        let bytes = t.to_csv("abc").unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b,config_hash\r\n\"x,y\",\"say \"\"hi\"\"\",abc\r\n");
    }

    #[test]
    fn rendering_is_deterministic() {
        let cfg = RunConfig::default();
        let checks = BTreeMap::from([("ok".to_string(), true)]);
        let result = serde_json::json!({"v": 0.1});
        let mut t = Table::new(["v"]);
        t.push(vec![num(0.1)]);
        let a = render("test", &cfg, &checks, &result, &t).unwrap();
        let b = render("test", &cfg, &checks, &result, &t).unwrap();
        assert_eq!(a, b);
        let other = serde_json::json!({"v": 0.2});
        assert_ne!(a.0, render("test", &cfg, &checks, &other, &t).unwrap().0);
        let doc: serde_json::Value = serde_json::from_str(&a.0).unwrap();
        assert_eq!(doc["schema_version"], 1);
        assert_eq!(doc["config_hash"].as_str().unwrap().len(), 64);
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, 1e-7, -3.0, 1.0 / 3.0, 6.02e23] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }
}
