use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Value};

use super::ReportError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
    Markdown,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "ndjson" => Ok(Format::Jsonl),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(ReportError::UnsupportedFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
            Format::Markdown => "md",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Int(i64),
    Text(String),
    /// Rendered `a;b;c` in CSV and Markdown, as an array in JSONL.
    List(Vec<String>),
}

impl Cell {
    fn flat(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::List(v) => v.join(LIST_SEP),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(n) => Value::from(*n),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::List(v) => Value::from(v.clone()),
        }
    }
}

pub(crate) const LIST_SEP: &str = ";";

/// A report row type with a fixed column order.
pub trait Tabular: Sized {
    fn columns() -> &'static [&'static str];
    fn cells(&self) -> Vec<Cell>;
    /// Rebuilds a row from its CSV fields, in column order.
    fn from_fields(fields: &[&str]) -> Result<Self, String>;
}

pub(crate) fn field_int<T: FromStr>(fields: &[&str], idx: usize) -> Result<T, String> {
    let raw = fields.get(idx).ok_or_else(|| format!("missing column {idx}"))?;
    raw.trim().parse::<T>().map_err(|_| format!("column {idx}: {raw:?} is not a number"))
}

pub(crate) fn field_list(fields: &[&str], idx: usize) -> Result<Vec<String>, String> {
    let raw = fields.get(idx).ok_or_else(|| format!("missing column {idx}"))?;
    Ok(if raw.is_empty() { Vec::new() } else { raw.split(LIST_SEP).map(str::to_string).collect() })
}

pub(crate) fn field_text(fields: &[&str], idx: usize) -> Result<String, String> {
    fields.get(idx).map(|s| s.to_string()).ok_or_else(|| format!("missing column {idx}"))
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

/// Renders rows in the given format. Output is a pure function of the input.
pub fn export<T: Tabular>(rows: &[T], format: Format) -> Result<Vec<u8>, ReportError> {
    let columns = T::columns();
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(columns)?;
            for row in rows {
                w.write_record(row.cells().iter().map(Cell::flat))?;
            }
            w.into_inner().map_err(|e| ReportError::Io(e.into_error()))
        }
        Format::Jsonl => {
            let mut out = Vec::new();
            for row in rows {
                let obj: Map<String, Value> =
                    columns.iter().zip(row.cells()).map(|(c, cell)| (c.to_string(), cell.json())).collect();
                serde_json::to_writer(&mut out, &obj)?;
                out.push(b'\n');
            }
            Ok(out)
        }
        Format::Markdown => {
            let mut s = String::new();
            s.push_str(&format!("| {} |\n", columns.join(" | ")));
            let align: Vec<&str> = match rows.first() {
                Some(r) => r.cells().iter().map(|c| if matches!(c, Cell::Int(_)) { "---:" } else { "---" }).collect(),
                None => vec!["---"; columns.len()],
            };
            s.push_str(&format!("| {} |\n", align.join(" | ")));
            for row in rows {
                let cells: Vec<String> = row
                    .cells()
                    .iter()
                    .map(|c| match c {
                        Cell::List(v) => md_escape(&v.join(", ")),
                        other => md_escape(&other.flat()),
                    })
                    .collect();
                s.push_str(&format!("| {} |\n", cells.join(" | ")));
            }
            Ok(s.into_bytes())
        }
    }
}

/// Parses CSV written by [`export`]. The header must match `T::columns()`.
pub fn parse_csv<T: Tabular>(data: &[u8]) -> Result<Vec<T>, ReportError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(data);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != T::columns() {
        return Err(ReportError::Schema(format!("expected columns {:?}, found {header:?}", T::columns())));
    }
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let fields: Vec<&str> = record.iter().collect();
        out.push(T::from_fields(&fields).map_err(|e| ReportError::Schema(format!("row {}: {e}", idx + 1)))?);
    }
    Ok(out)
}
