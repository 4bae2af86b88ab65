//! Deterministic artifact writing: tables in CSV or JSON-lines, run logs,
//! atomic file placement.
//!
//! Extended reals round-trip as the literals `+inf` / `-inf`. Every artifact
//! embeds the config hash (a comment line in CSV, a field per record in
//! JSON-lines), and nothing time- or machine-dependent is ever written, so
//! reruns with the same config and seed are byte-identical.

use crate::errors::AppError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::JsonLines => "jsonl",
        }
    }
}

/// One table cell.
#[derive(Clone, Debug)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "+inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => format!("{v}"),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => format!("{b}"),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(v) => format!("{v}"),
            Cell::Float(v) => {
                if v.is_finite() {
                    format!("{v}")
                } else {
                    format!("\"{}\"", fmt_f64(*v))
                }
            }
            Cell::Text(s) => format!("{:?}", s),
            Cell::Bool(b) => format!("{b}"),
        }
    }
}

/// In-memory table rendered to the selected format.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, config_hash: &str) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                let _ = writeln!(out, "# config_hash={config_hash}");
                let _ = writeln!(out, "{}", self.columns.join(","));
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    let _ = writeln!(out, "{}", cells.join(","));
                }
            }
            Format::JsonLines => {
                for row in &self.rows {
                    let mut fields = Vec::with_capacity(row.len() + 1);
                    fields.push(format!("\"config_hash\":\"{config_hash}\""));
                    for (name, cell) in self.columns.iter().zip(row) {
                        fields.push(format!("\"{name}\":{}", cell.json()));
                    }
                    let _ = writeln!(out, "{{{}}}", fields.join(","));
                }
            }
        }
        out
    }
}

/// Writes via a temp file and an atomic rename so failures never leave a
/// partial artifact behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), AppError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Run-log payload shared by all commands; serialized as pretty JSON with a
/// stable field order.
pub struct RunLog {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub version: &'static str,
    pub format: Format,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

impl RunLog {
    pub fn render(&self) -> String {
        let obj = serde_json::json!({
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "version": self.version,
            "format": self.format.extension(),
            "outputs": self.outputs,
            "summary": self.summary,
        });
        let mut s = serde_json::to_string_pretty(&obj).expect("serializable run log");
        s.push('\n');
        s
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf, AppError> {
        let path = out_dir.join(format!("{}_runlog.json", self.command));
        write_atomic(&path, &self.render())?;
        Ok(path)
    }
}

/// JSON value for an extended real: number when finite, string literal
/// otherwise.
pub fn json_f64(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::Value::String(fmt_f64(v))
    }
}
