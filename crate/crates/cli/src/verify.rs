//! Reproducibility check: re-runs the experiment embedded in an output
//! file's header and compares the regenerated bytes against the file.

use std::path::Path;

use dwva_core::DarkPort;

use crate::config::{resolve, RawConfig};
use crate::error::{CliError, Result};
use crate::sweep::{min_angle_contents, spectrum_file_contents, sweep_file_contents};
use crate::table::OutputFormat;

/// Parses the `# key = value` header of an emitted file.
fn parse_header(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix("# ") else {
            continue;
        };
        if let Some((key, value)) = rest.split_once(" = ") {
            pairs.push((key.to_string(), value.to_string()));
        }
    }
    if pairs.is_empty() {
        return Err(CliError::VerifyMismatch(
            "file carries no metadata header".into(),
        ));
    }
    Ok(pairs)
}

fn header_value<'a>(pairs: &'a [(String, String)], key: &str) -> Result<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| CliError::VerifyMismatch(format!("header lacks '{key}'")))
}

/// Regenerates an output file from its own embedded configuration.
pub fn regenerate(text: &str) -> Result<String> {
    let pairs = parse_header(text)?;
    let mut raw = RawConfig::default();
    for (key, value) in &pairs {
        if let Some(config_key) = key.strip_prefix("config.") {
            raw.set(config_key, value)?;
        }
    }
    let cfg = resolve(&raw)?;

    match header_value(&pairs, "run.command")? {
        "sweep" => {
            let format = OutputFormat::parse(header_value(&pairs, "run.format")?)?;
            sweep_file_contents(&cfg, format)
        }
        "min-angle" => {
            let format = OutputFormat::parse(header_value(&pairs, "run.format")?)?;
            min_angle_contents(&cfg, format)
        }
        "simulate-spectrum" => {
            let port = match header_value(&pairs, "run.port")? {
                "i" => DarkPort::I,
                "ii" => DarkPort::II,
                other => {
                    return Err(CliError::VerifyMismatch(format!(
                        "unknown run.port '{other}'"
                    )))
                }
            };
            spectrum_file_contents(&cfg, port)
        }
        other => Err(CliError::VerifyMismatch(format!(
            "unknown run.command '{other}'"
        ))),
    }
}

/// Re-runs the file's experiment and checks byte equality.
pub fn verify_file(path: &Path) -> Result<()> {
    let original = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
    let regenerated = regenerate(&original)?;
    if regenerated == original {
        Ok(())
    } else {
        Err(CliError::VerifyMismatch(format!(
            "{} does not reproduce from its embedded configuration",
            path.display()
        )))
    }
}
