//! Result tables, CSV writing and the JSON metadata sidecar.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// One table entry. Non-finite floats are stored as `Missing`, so tables
/// never carry untagged NaN; rows flag failures in a status column.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Float(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Float(v)
        } else {
            Cell::Missing
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::from)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<Option<usize>> for Cell {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Cell::Missing, Cell::from)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Rows of named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(name: S, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match the columns of table `{}`",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Vec<&Cell> {
        let j = self
            .column_index(name)
            .unwrap_or_else(|| panic!("table `{}` has no column `{name}`", self.name));
        self.rows.iter().map(|r| &r[j]).collect()
    }

    pub fn floats(&self, name: &str) -> Vec<Option<f64>> {
        self.column(name).into_iter().map(Cell::as_f64).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let text = self.to_csv_string()?;
        fs::write(path, text).map_err(|e| io_error(path, e))
    }

    /// One JSON object per row.
    pub fn json_lines(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .cloned()
                        .zip(r.iter().map(Cell::to_json))
                        .collect(),
                )
            })
            .collect()
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source: e,
    }
}

/// Outcome of one study: tables plus free-form summary metadata.
#[derive(Clone, Debug)]
pub struct StudyResult {
    pub tables: Vec<Table>,
    /// Extra JSON lines files: name and records.
    pub json_lines: Vec<(String, Vec<Value>)>,
    pub summary: Value,
    pub wall_seconds: f64,
}

impl StudyResult {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    program: &'static str,
    version: &'static str,
    kind: String,
    config_hash: String,
    config: Value,
    started_unix: u64,
    wall_seconds: f64,
    outputs: Vec<String>,
    summary: &'a Value,
}

pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Writes every table as CSV, JSON lines files and `<kind>.meta.json`.
/// Returns the written paths.
pub fn emit_outputs(
    cfg: &ExperimentConfig,
    result: &StudyResult,
    dir: &Path,
    started_unix: u64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut written = Vec::new();
    for t in &result.tables {
        let path = dir.join(format!("{}.csv", t.name));
        t.write_csv(&path)?;
        written.push(path);
    }
    for (name, records) in &result.json_lines {
        let path = dir.join(format!("{name}.jsonl"));
        let mut f = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
        for r in records {
            writeln!(f, "{}", serde_json::to_string(r)?).map_err(|e| io_error(&path, e))?;
        }
        written.push(path);
    }
    let config_path = dir.join("config.json");
    fs::write(&config_path, serde_json::to_string_pretty(&cfg.echo())?)
        .map_err(|e| io_error(&config_path, e))?;
    written.push(config_path);
    let meta_path = dir.join(format!("{}.meta.json", cfg.kind().name()));
    let sidecar = Sidecar {
        program: "specwave",
        version: version(),
        kind: cfg.kind().name().into(),
        config_hash: cfg.hash(),
        config: cfg.echo(),
        started_unix,
        wall_seconds: result.wall_seconds,
        outputs: written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        summary: &result.summary,
    };
    fs::write(&meta_path, serde_json::to_string_pretty(&sidecar)?).map_err(|e| io_error(&meta_path, e))?;
    written.push(meta_path);
    Ok(written)
}
