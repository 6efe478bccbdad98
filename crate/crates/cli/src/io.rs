//! File formats shared by the commands.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use linkctr::graph::{build_graph, parse_edge_list, Graph};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// A rectangular table written as CSV or as a JSON array of objects.
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Writes `dir/stem.{csv,json}` and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> CliResult<PathBuf> {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::write(&path, e))?;
                w.write_record(&self.headers)
                    .map_err(|e| CliError::write(&path, e))?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::to_csv))
                        .map_err(|e| CliError::write(&path, e))?;
                }
                w.flush().map_err(|e| CliError::write(&path, e))?;
            }
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .headers
                            .iter()
                            .zip(row)
                            .map(|(h, c)| (h.to_string(), c.to_json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                write_json(&path, &records)?;
            }
        }
        Ok(path)
    }
}

/// Rows of a CSV or JSON table keyed by column name, as text.
pub fn read_table(path: &Path) -> CliResult<Vec<HashMap<String, String>>> {
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        let rows: Vec<Map<String, Value>> =
            serde_json::from_str(&text).map_err(|e| CliError::read(path, e))?;
        return Ok(rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(k, v)| {
                        let s = match v {
                            Value::Null => String::new(),
                            Value::String(s) => s,
                            other => other.to_string(),
                        };
                        (k, s)
                    })
                    .collect()
            })
            .collect());
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::read(path, e))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::read(path, e))?
        .clone();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::read(path, e))?;
        rows.push(
            headers
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect(),
        );
    }
    Ok(rows)
}

/// Typed lookup of one column of a row from [`read_table`]. Empty cells read
/// as `None`.
pub fn field<T: std::str::FromStr>(
    path: &Path,
    row_no: usize,
    row: &HashMap<String, String>,
    column: &str,
) -> CliResult<Option<T>> {
    let raw = row
        .get(column)
        .ok_or_else(|| CliError::read(path, format!("missing column `{column}`")))?;
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|_| CliError::read(path, format!("row {row_no}: invalid {column} `{raw}`")))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::write(path, e))
}

pub fn create_out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))
}

/// Edge list with a `# nodes N` header so isolated nodes survive a round
/// trip. Node ids are the graph's dense ids.
pub fn write_graph(path: &Path, g: &Graph) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::write(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "# nodes {}", g.node_count())?;
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            writeln!(w, "{u} {v} {}", g.weights()[e])?;
        }
        w.flush()
    })();
    res.map_err(|e| CliError::write(path, e))
}

pub fn read_graph(path: &Path) -> CliResult<Graph> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let declared = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("# nodes "))
        .map(|n| {
            n.trim()
                .parse::<usize>()
                .map_err(|_| CliError::read(path, format!("invalid node count `{n}`")))
        })
        .transpose()?;
    let records = parse_edge_list(text.as_bytes()).map_err(|e| CliError::read(path, e))?;
    let (g, _) = build_graph(&records).map_err(|e| CliError::read(path, e))?;
    match declared {
        Some(n) => g.with_node_count(n).map_err(|e| CliError::read(path, e)),
        None => Ok(g),
    }
}

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::read(path, e))
}
