//! Report serialization: JSON envelopes and CSV tables, written atomically.

use crate::{Error, Result};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Top-level JSON report shape.
#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub tool_version: &'static str,
    pub config_echo: C,
    pub rows: Vec<R>,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(config_echo: C, rows: Vec<R>) -> Self {
        Envelope { tool_version: TOOL_VERSION, config_echo, rows }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidParameter(format!("serialization: {e}")))
    }
}

/// A CSV table: one metadata comment line, a header, then rows.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub metadata: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(&self.metadata);
        out.push('\n');
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Full-precision float formatting for report cells; round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    // The shortest representation that parses back to the same bits.
    format!("{x}")
}

/// Write `text` to `path` atomically (temp file in the same directory,
/// then rename), or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            print!("{text}");
            std::io::stdout()
                .flush()
                .map_err(|e| Error::InvalidParameter(format!("stdout: {e}")))?;
            Ok(())
        }
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty());
            let mut tmp = match dir {
                Some(d) => tempfile::NamedTempFile::new_in(d),
                None => tempfile::NamedTempFile::new_in("."),
            }
            .map_err(|e| Error::InvalidParameter(format!("temp file: {e}")))?;
            tmp.write_all(text.as_bytes())
                .map_err(|e| Error::InvalidParameter(format!("write {}: {e}", p.display())))?;
            tmp.persist(p)
                .map_err(|e| Error::InvalidParameter(format!("rename to {}: {e}", p.display())))?;
            Ok(())
        }
    }
}
