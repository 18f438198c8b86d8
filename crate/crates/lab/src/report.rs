//! Report tables and their CSV / JSON encodings.
//!
//! Floats are written as the shortest decimal that round-trips (`{:?}` in
//! CSV, ryu in JSON), so reruns with the same seed are byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::LabError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Str(s) => {
                if s.contains([',', '"', '\n', '\r']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            // JSON has no infinities; keep them readable
            Cell::Float(v) => json!(format!("{v:?}")),
            Cell::Str(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Null => Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cells of one column, in row order.
    pub fn values(&self, name: &str) -> Vec<&Cell> {
        match self.column(name) {
            Some(j) => self.rows.iter().map(|r| &r[j]).collect(),
            None => Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                Value::Object(m)
            })
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// Subcommand name; also the output file stem.
    pub kind: String,
    pub version: String,
    pub seed: u64,
    /// Echo of the resolved inputs.
    pub inputs: Value,
    /// The first table is the primary one.
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
    /// Set when the experiment ran but could not produce its result; the
    /// report is still written and the process exits with code 3.
    pub infeasible: Option<String>,
}

impl ExperimentReport {
    pub fn new(kind: &str, seed: u64, inputs: Value) -> Self {
        ExperimentReport {
            kind: kind.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            inputs,
            tables: Vec::new(),
            warnings: Vec::new(),
            infeasible: None,
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    pub fn to_json(&self) -> Value {
        let tables: Map<String, Value> = self.tables.iter().map(|t| (t.name.clone(), t.to_json())).collect();
        json!({
            "kind": self.kind,
            "version": self.version,
            "seed": self.seed,
            "inputs": self.inputs,
            "tables": tables,
            "warnings": self.warnings,
            "infeasible": self.infeasible,
        })
    }

    fn csv_name(&self, i: usize) -> String {
        if i == 0 {
            format!("{}.csv", self.kind)
        } else {
            format!("{}-{}.csv", self.kind, self.tables[i].name)
        }
    }

    /// Write the report into `dir`, returning the paths written.
    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>, LabError> {
        std::fs::create_dir_all(dir).map_err(|e| LabError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> Result<(), LabError> {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| LabError::Io(format!("{}: {e}", p.display())))?;
            written.push(p);
            Ok(())
        };
        if matches!(format, Format::Csv | Format::Both) {
            for (i, t) in self.tables.iter().enumerate() {
                put(self.csv_name(i), t.to_csv())?;
            }
        }
        if matches!(format, Format::Json | Format::Both) {
            let mut body = serde_json::to_string_pretty(&self.to_json()).map_err(|e| LabError::Io(e.to_string()))?;
            body.push('\n');
            put(format!("{}.json", self.kind), body)?;
        }
        Ok(written)
    }
}

/// Wilson score interval for `hits` out of `n` at z = 1.96.
pub fn wilson_interval(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054;
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}
