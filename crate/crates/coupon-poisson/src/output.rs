//! Machine-readable output records for the CLI.
//!
//! CSV layout: first line `# schema=coupon-poisson/1`, second line the
//! column header, then one row per line; trailing `# key=value` comment
//! lines may carry derived scalars (fitted slopes). JSON mirrors the same
//! record as `{meta, rows}` with one object per row.
//!
//! Floats are serialized with 17 significant digits in CSV so every value
//! parses back to the identical bit pattern; JSON uses serde_json's
//! shortest-roundtrip encoding, which is equally lossless.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "coupon-poisson/1";

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    UInt(u64),
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(v) => v.clone(),
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::UInt(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(v) => json!(v),
            Cell::Bool(v) => json!(v),
        }
    }
}

/// 17 significant digits: enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A table with metadata, the single currency of every subcommand.
#[derive(Debug, Clone, Default)]
pub struct OutputRecord {
    pub meta: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// derived scalars appended as CSV trailer comments
    pub trailer: Vec<(String, f64)>,
}

impl OutputRecord {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        let mut meta = BTreeMap::new();
        meta.insert("schema_version".into(), json!(SCHEMA));
        meta.insert("command".into(), json!(command));
        Self {
            meta,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
            trailer: vec![],
        }
    }

    pub fn set_meta(&mut self, key: &str, value: Value) {
        self.meta.insert(key.into(), value);
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# schema={SCHEMA}")?;
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        for (key, value) in &self.trailer {
            writeln!(out, "# {key}={}", format_float(*value))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), v.clone());
        }
        for (k, v) in &self.trailer {
            meta.insert(k.clone(), json!(v));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert(name.clone(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "meta": Value::Object(meta), "rows": rows });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)
    }
}
