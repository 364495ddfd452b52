//! Tabular output in CSV or JSON.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

/// Environment variable naming the directory that relative `--out` paths are resolved against.
pub const OUT_DIR_ENV: &str = "QENTROPIC_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Fixed-point rendering with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.11}", 0.0);
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (11 - exponent).clamp(0, 60) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_number(*v),
                    Cell::Text(s) => s.clone(),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (key, cell) in self.header.iter().zip(row) {
                    let v = match cell {
                        Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
                        Cell::Text(s) => Value::String(s.clone()),
                        Cell::Bool(b) => Value::Bool(*b),
                        Cell::Empty => Value::Null,
                    };
                    obj.insert((*key).to_string(), v);
                }
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("JSON values serialize");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Resolves `--out` against [`OUT_DIR_ENV`] when the path is relative.
pub fn resolve_out_path(out: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if out.is_relative() && !dir.is_empty() => Path::new(&dir).join(out),
        _ => out.to_path_buf(),
    }
}

pub fn emit(table: &Table, format: Format, out: Option<&Path>) -> std::io::Result<()> {
    let text = table.render(format);
    match out {
        Some(path) => {
            let path = resolve_out_path(path);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}
