//! Self-describing output files.
//!
//! Every emitted file begins with the resolved configuration and the
//! artifact version: JSON-lines files carry a `{"meta": ...}` first line,
//! CSV files a `#`-prefixed comment line that readers skip with the comment
//! option. Floats are written in shortest round-trip form, so CSV output
//! parses back losslessly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed simulation conventions, embedded in every meta block.
#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub gate: &'static str,
    pub bit_order: &'static str,
    pub depolarizing: &'static str,
    pub lr_decay: &'static str,
    pub entropy_units: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            gate: "exp(i*theta*sigma_i sigma_j)",
            bit_order: "qubit 0 = most significant amplitude-index bit",
            depolarizing: "15-Pauli Kraus form, strength p, weight p/15 per non-identity Pauli pair",
            lr_decay: "lr * decay_rate^(t/decay_steps), continuous exponent",
            entropy_units: "bits (log2)",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Meta<'a, C: Serialize> {
    artifact: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    conventions: Conventions,
}

fn meta_json<C: Serialize>(command: &str, config: &C) -> Result<String> {
    let meta = Meta {
        artifact: "ravqe",
        version: ARTIFACT_VERSION,
        command,
        config,
        conventions: Conventions::default(),
    };
    Ok(serde_json::to_string(&serde_json::json!({ "meta": meta }))?)
}

/// Write a JSON-lines file: the meta line followed by one record per line.
pub fn write_jsonl<C: Serialize, R: Serialize>(
    path: &Path,
    command: &str,
    config: &C,
    records: &[R],
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{}", meta_json(command, config)?)?;
    for record in records {
        writeln!(out, "{}", serde_json::to_string(record)?)?;
    }
    out.flush()?;
    Ok(())
}

/// Write a CSV file with a `#` meta comment line, a header, and one row per
/// record.
pub fn write_csv<C: Serialize, R: Serialize>(
    path: &Path,
    command: &str,
    config: &C,
    rows: &[R],
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# {}", meta_json(command, config)?)?;
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read rows from a CSV file written by [`write_csv`] (meta comment skipped).
pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Read records from a JSON-lines file written by [`write_jsonl`], skipping
/// the meta line.
pub fn read_jsonl<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut records = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if k == 0 {
            if let Ok(value) = serde_json::from_str::<serde_json::Value>(&line) {
                if value.get("meta").is_some() {
                    continue;
                }
            }
        }
        records.push(serde_json::from_str(&line).with_context(|| format!("record on line {}", k + 1))?);
    }
    Ok(records)
}

/// Write a pretty JSON document with the meta block alongside the payload.
pub fn write_json<C: Serialize, P: Serialize>(
    path: &Path,
    command: &str,
    config: &C,
    payload_name: &str,
    payload: &P,
) -> Result<()> {
    let meta = Meta {
        artifact: "ravqe",
        version: ARTIFACT_VERSION,
        command,
        config,
        conventions: Conventions::default(),
    };
    let doc = serde_json::json!({ "meta": meta, payload_name: payload });
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
