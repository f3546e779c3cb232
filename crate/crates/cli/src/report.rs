//! Run reports: a JSON document with the resolved configuration and the
//! module payload, plus an optional CSV table.
//!
//! JSON keys come out sorted because payloads are routed through
//! `serde_json::Value`, whose maps are ordered. Wall time is printed to
//! stderr and never written to the files, so reruns are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub const FORMAT_VERSION: u32 = 1;

/// Column-ordered table, written as CSV with a header row.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Formats a float for CSV; shortest round-trip form, `inf`/`nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

/// Joins a vector into one CSV cell.
pub fn joined(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

pub struct Outcome {
    pub payload: Value,
    pub table: Option<Table>,
    /// Assertion-style failures; any entry makes the process exit with 2.
    pub failed_checks: Vec<String>,
}

impl Outcome {
    pub fn new(payload: impl Serialize) -> Result<Self> {
        Ok(Outcome { payload: serde_json::to_value(payload)?, table: None, failed_checks: Vec::new() })
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn fail_if(mut self, failed: bool, what: impl Into<String>) -> Self {
        if failed {
            self.failed_checks.push(what.into());
        }
        self
    }
}

pub fn write(
    out: &Path,
    command: &str,
    seed: u64,
    config: &BTreeMap<String, Value>,
    outcome: &Outcome,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
    let stem = format!("{}-{seed}", command.replace(' ', "-"));
    let doc = json!({
        "command": command,
        "config": config,
        "results": outcome.payload,
        "checks_failed": outcome.failed_checks,
        "versions": { "tangents": tangents_core::VERSION, "format": FORMAT_VERSION },
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    let json_path = out.join(format!("{stem}.json"));
    fs::write(&json_path, text).with_context(|| format!("writing {}", json_path.display()))?;
    let mut written = vec![json_path];
    if let Some(table) = &outcome.table {
        let csv_path = out.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        written.push(csv_path);
    }
    Ok(written)
}
