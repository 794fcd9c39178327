//! Report envelopes, input hashing and JSON/CSV output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// An input file with the SHA-256 of its bytes.
#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

/// Reads a file and records its hash.
pub fn read_input(role: &str, path: &Path, inputs: &mut Vec<InputRecord>) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {role} file {}", path.display()))?;
    inputs.push(InputRecord {
        role: role.to_string(),
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    });
    String::from_utf8(bytes).with_context(|| format!("{role} file {} is not UTF-8", path.display()))
}

/// A plot-ready table for CSV output.
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Table { headers, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Serialize)]
pub struct Envelope<'a> {
    pub command: &'a str,
    pub inputs: &'a [InputRecord],
    pub seed: u64,
    pub parameters: Value,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub result: Value,
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Writes the envelope as JSON, or the table as CSV preceded by `#` lines
/// carrying the command and input hashes.
pub fn emit(envelope: &Envelope<'_>, table: &Table, format: Format, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, envelope)?;
            writeln!(w)?;
        }
        Format::Csv => {
            writeln!(w, "# command: {}", envelope.command)?;
            for input in envelope.inputs {
                writeln!(w, "# {} {} sha256={}", input.role, input.path.display(), input.sha256)?;
            }
            writeln!(w, "# seed: {}", envelope.seed)?;
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(&table.headers)?;
            for row in &table.rows {
                csv.write_record(row)?;
            }
            csv.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a generated artifact to `out`, or stdout.
pub fn write_artifact(text: &str, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
