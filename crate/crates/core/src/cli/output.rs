//! Deterministic CSV / JSON emission.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) if v.is_nan() => "NaN".into(),
            Cell::F(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            // 17 significant digits
            Cell::F(v) => format!("{v:.16e}"),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::U(v) => Value::from(*v),
            Cell::S(s) => Value::from(s.clone()),
        }
    }
}

/// Column name plus a short description for the header comment.
pub struct Column {
    pub name: &'static str,
    pub about: &'static str,
}

pub const fn col(name: &'static str, about: &'static str) -> Column {
    Column { name, about }
}

pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

/// Run metadata written ahead of every table.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    fn header(&self, columns: &[Column]) -> String {
        let cols: Vec<String> = columns.iter().map(|c| format!("{}={}", c.name, c.about)).collect();
        let seed = self.seed.map(|s| format!(" seed={s}")).unwrap_or_default();
        format!(
            "# twqkd {} command={} config_sha256={}{seed} columns: {}",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config_sha256,
            cols.join("; ")
        )
    }
}

/// Renders a table; the result is written to disk by [`write_outputs`] once every table is ready.
pub fn render(table: &Table, prov: &Provenance, format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut out = prov.header(&table.columns);
            out.push('\n');
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(table.columns.iter().map(|c| c.name)).map_err(|e| Error::Parse(e.to_string()))?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv)).map_err(|e| Error::Parse(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?);
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (c, v) in table.columns.iter().zip(r) {
                        m.insert(c.name.to_string(), v.json());
                    }
                    Value::Object(m)
                })
                .collect();
            let doc = serde_json::json!({
                "tool": format!("twqkd {}", env!("CARGO_PKG_VERSION")),
                "command": prov.command,
                "config_sha256": prov.config_sha256,
                "seed": prov.seed,
                "columns": table.columns.iter().map(|c| serde_json::json!({"name": c.name, "about": c.about})).collect::<Vec<_>>(),
                "rows": rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Writes `(file name, contents)` pairs under `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, body) in files {
        let mut f = fs::File::create(dir.join(name))?;
        f.write_all(body.as_bytes())?;
    }
    Ok(())
}
