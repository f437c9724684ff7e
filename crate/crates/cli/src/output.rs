//! Tabular and JSON output with atomic file replacement.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

use crate::config::OutputFormat;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Real(v)
        } else {
            Cell::Empty
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Column-named rows, written as CSV or as column arrays in JSON.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Two-column `field,value` table from a flat JSON object.
    pub fn from_fields(value: &Value) -> Self {
        let mut t = Table::new(&["field", "value"]);
        if let Value::Object(map) = value {
            for (k, v) in map {
                flatten(k, v, &mut t);
            }
        }
        t
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        // writing to memory cannot fail
        w.write_record(&self.columns).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row.iter().map(csv_cell))
                .expect("in-memory csv");
        }
        w.into_inner().expect("in-memory csv")
    }

    pub fn to_json_value(&self) -> Value {
        let mut map = Map::new();
        for (i, name) in self.columns.iter().enumerate() {
            let col = self.rows.iter().map(|r| json_cell(&r[i])).collect();
            map.insert(name.clone(), Value::Array(col));
        }
        Value::Object(map)
    }
}

fn flatten(prefix: &str, v: &Value, t: &mut Table) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                flatten(&format!("{prefix}.{k}"), inner, t);
            }
        }
        Value::Array(items) => {
            for (i, inner) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), inner, t);
            }
        }
        Value::Null => {}
        Value::Bool(b) => t.push(vec![prefix.into(), Cell::Text(b.to_string())]),
        Value::String(s) => t.push(vec![prefix.into(), Cell::Text(s.clone())]),
        Value::Number(n) => {
            let cell = match (n.as_i64(), n.as_f64()) {
                (Some(i), _) => Cell::Int(i),
                (None, Some(f)) => Cell::Real(f),
                _ => Cell::Empty,
            };
            t.push(vec![prefix.into(), cell]);
        }
    }
}

/// Nine significant digits.
fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Real(f) => format!("{f:.8e}"),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Int(i) => Value::from(*i),
        Cell::Real(f) => Value::from(*f),
        Cell::Text(s) => Value::from(s.clone()),
        Cell::Empty => Value::Null,
    }
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Archival(PrettyFormatter<'static>);

impl Formatter for Archival {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with 17-significant-digit floats. Non-finite floats become
/// `null` in serde_json and are therefore never emitted as NaN.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, Archival(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    buf.push(b'\n');
    buf
}

/// Run metadata attached to every JSON document.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub software: &'static str,
    pub version: &'static str,
    pub seed: u64,
    /// Canonical configuration text.
    pub config: String,
}

impl Provenance {
    pub fn new(seed: u64, config: String) -> Self {
        Provenance {
            software: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
        }
    }
}

/// A finished result ready to be written in either format.
#[derive(Debug, Clone)]
pub struct Document {
    pub table: Table,
    /// Scalar results (fit, report, ...), included in JSON as `result`.
    pub result: Option<Value>,
}

impl Document {
    pub fn render(&self, format: OutputFormat, provenance: &Provenance) -> Vec<u8> {
        match format {
            OutputFormat::Csv => self.table.to_csv(),
            OutputFormat::Json => {
                let mut map = Map::new();
                map.insert(
                    "provenance".into(),
                    serde_json::to_value(provenance).expect("plain struct"),
                );
                if !self.table.columns.is_empty() {
                    map.insert("data".into(), self.table.to_json_value());
                }
                if let Some(r) = &self.result {
                    map.insert("result".into(), r.clone());
                }
                to_json_bytes(&Value::Object(map))
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct WriteError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Writes `bytes` to a temporary file beside `path` and renames it into
/// place, so readers see either the old file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), WriteError> {
    let err = |source| WriteError {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_nine_significant_digits() {
        let mut t = Table::new(&["delta1_rad", "g_value", "note"]);
        t.push(vec![
            Cell::Real(std::f64::consts::PI),
            Cell::Int(3),
            Cell::Text("a,b".into()),
        ]);
        let text = String::from_utf8(t.to_csv()).unwrap();
        assert_eq!(text, "delta1_rad,g_value,note\n3.14159265e0,3,\"a,b\"\n");
    }

    #[test]
    fn json_floats_are_archival() {
        let text =
            String::from_utf8(to_json_bytes(&serde_json::json!({"x": 0.1, "n": 3}))).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_values_are_never_nan() {
        assert_eq!(Cell::from(f64::NAN), Cell::Empty);
        let text = String::from_utf8(to_json_bytes(&f64::NAN)).unwrap();
        assert_eq!(text.trim(), "null");
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/x.csv"), b"x").is_err());
    }
}
