//! Output tables: delimited text and line-delimited records, both headed by
//! `#`-prefixed metadata that echoes the full resolved configuration.
//!
//! Every emitted byte is a pure function of (config, seed); the verify
//! command relies on that to re-run an output file from its own header.

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Space-delimited columns under a `# columns:` header.
    Text,
    /// One `key=value` record per row for machine ingestion.
    Records,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Text => "text",
            OutputFormat::Records => "records",
        }
    }

    pub fn parse(s: &str) -> Result<OutputFormat> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "records" => Ok(OutputFormat::Records),
            other => Err(CliError::Config(format!(
                "format must be text|records, got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        match format {
            OutputFormat::Text => {
                out.push_str(&format!("# columns: {}\n", self.columns.join(" ")));
                for row in &self.rows {
                    out.push_str(&row.join(" "));
                    out.push('\n');
                }
            }
            OutputFormat::Records => {
                for row in &self.rows {
                    let record: Vec<String> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| format!("{c}={v}"))
                        .collect();
                    out.push_str(&record.join(" "));
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Fixed-precision scientific notation for float cells; keeps columns
/// aligned-ish and output byte-stable.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.6e}")
}

/// FNV-1a 64-bit digest, hex-encoded.
pub fn fnv1a64(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Digest of the verbatim configuration entries.
pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let mut buf = String::new();
    for (k, v) in cfg.raw.entries() {
        buf.push_str(k);
        buf.push('=');
        buf.push_str(v);
        buf.push('\n');
    }
    fnv1a64(buf.as_bytes())
}

/// Standard metadata header: schema, tool version, digest, command, and the
/// verbatim config echo the verify command re-runs from.
pub fn standard_meta(cfg: &ExperimentConfig, schema: &str, command: &str) -> Vec<(String, String)> {
    let mut meta = vec![
        ("schema".to_string(), format!("dwva.{schema}.{SCHEMA_VERSION}")),
        ("tool_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("run.command".to_string(), command.to_string()),
        ("seed".to_string(), cfg.trace.seed.to_string()),
        (
            "config_digest".to_string(),
            format!("fnv1a:{}", config_digest(cfg)),
        ),
    ];
    for (k, v) in cfg.raw.entries() {
        meta.push((format!("config.{k}"), v.to_string()));
    }
    meta
}
