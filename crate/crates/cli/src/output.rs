//! Tables rendered as CSV (with `#` provenance lines) or JSON.

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    /// Space-separated in CSV, an array in JSON.
    List(Vec<u64>),
    /// Space-separated in CSV, an array of strings in JSON.
    Words(Vec<String>),
    /// Empty in CSV, `null` in JSON.
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::List(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
            Cell::Words(v) => v.join(" "),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::List(v) => json!(v),
            Cell::Words(v) => json!(v),
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

#[derive(Clone, Debug, Default)]
pub struct Row {
    pub cells: Vec<Cell>,
    /// JSON-only fields.
    pub extra: Vec<(String, Value)>,
}

impl Row {
    pub fn new(cells: Vec<Cell>) -> Self {
        Row { cells, extra: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Row) {
        debug_assert_eq!(row.cells.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn provenance(cfg: &RunConfig) -> Vec<(String, String)> {
    let mut kv = vec![
        ("tool".to_string(), env!("CARGO_PKG_NAME").to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ];
    kv.extend(cfg.normalized());
    kv
}

pub fn render(table: &Table, cfg: &RunConfig, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => render_csv(table, cfg),
        Format::Json => render_json(table, cfg),
    }
}

fn render_csv(table: &Table, cfg: &RunConfig) -> Vec<u8> {
    let mut out = Vec::new();
    for (k, v) in provenance(cfg) {
        out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns).expect("write to memory");
    for row in &table.rows {
        w.write_record(row.cells.iter().map(Cell::csv)).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

fn render_json(table: &Table, cfg: &RunConfig) -> Vec<u8> {
    let prov: Map<String, Value> = provenance(cfg).into_iter().map(|(k, v)| (k, Value::String(v))).collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (col, cell) in table.columns.iter().zip(&row.cells) {
                obj.insert(col.to_string(), cell.json());
            }
            for (k, v) in &row.extra {
                obj.insert(k.clone(), v.clone());
            }
            Value::Object(obj)
        })
        .collect();
    let doc = json!({ "provenance": prov, "rows": rows });
    let mut out = serde_json::to_vec_pretty(&doc).expect("serialize json");
    out.push(b'\n');
    out
}
