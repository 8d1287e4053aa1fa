//! Writes results with embedded metadata.
//!
//! CSV files start with `# key: value` lines; JSON files wrap the result as
//! `{"metadata": ..., "result": ...}` with keys in sorted order.

use std::io::Write;
use std::path::PathBuf;

use gravdec::PhysicalConstants;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Format;
use crate::error::CliError;

pub struct Sink {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: String,
    pub command: String,
    pub config: Value,
    pub constants: PhysicalConstants,
    pub tags: Vec<String>,
}

impl Metadata {
    pub fn new(command: &str, config: &impl Serialize, constants: PhysicalConstants, tags: Vec<String>) -> Result<Self, CliError> {
        Ok(Metadata {
            version: format!("gravdec {}", gravdec::VERSION),
            command: command.to_string(),
            config: serde_json::to_value(config).map_err(gravdec::Error::from)?,
            constants,
            tags,
        })
    }

    fn csv_header(&self) -> Result<String, CliError> {
        Ok(format!(
            "# version: {}\n# command: {}\n# config: {}\n# constants: {}\n# tags: {}\n",
            self.version,
            self.command,
            compact(&self.config)?,
            compact(&self.constants)?,
            self.tags.join(";"),
        ))
    }
}

/// Single-line JSON with sorted keys.
fn compact(v: &impl Serialize) -> Result<String, CliError> {
    let v = serde_json::to_value(v).map_err(gravdec::Error::from)?;
    Ok(serde_json::to_string(&v).map_err(gravdec::Error::from)?)
}

impl Sink {
    /// `csv` writes the table body; `result` is the JSON payload.
    pub fn emit(
        &self,
        meta: &Metadata,
        csv: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
        result: impl FnOnce() -> Result<Value, CliError>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        match self.format {
            Format::Csv => {
                buf.extend_from_slice(meta.csv_header()?.as_bytes());
                csv(&mut buf)?;
            }
            Format::Json => {
                let doc = json!({
                    "metadata": serde_json::to_value(meta).map_err(gravdec::Error::from)?,
                    "result": result()?,
                });
                serde_json::to_writer_pretty(&mut buf, &doc).map_err(gravdec::Error::from)?;
                buf.push(b'\n');
            }
        }
        match &self.path {
            Some(p) => std::fs::write(p, &buf)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(&buf)?;
                out.flush()?;
            }
        }
        Ok(())
    }
}

/// Plain `name,value` table.
pub fn key_value_csv(rows: &[(&str, String)], buf: &mut Vec<u8>) -> Result<(), CliError> {
    buf.extend_from_slice(b"quantity,value\n");
    for (k, v) in rows {
        buf.extend_from_slice(format!("{k},{v}\n").as_bytes());
    }
    Ok(())
}
