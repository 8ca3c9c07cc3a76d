//! Tabular output with stable CSV/JSON rendering.
//!
//! CSV: one header row, fixed column order, floats at 9 significant digits
//! (`{:.8e}`), `inf`/`nan` literals for non-finite values — so equal inputs
//! render to byte-identical files and every cell parses back losslessly at
//! the printed precision. JSON mirrors the rows as an array of objects under
//! a metadata object (command, version, resolved parameters); non-finite
//! floats become the same literal strings, since JSON numbers cannot carry
//! them.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(&'static str),
}

impl Cell {
    pub fn bool(flag: bool) -> Self {
        Cell::Text(if flag { "true" } else { "false" })
    }

    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => (*s).to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(x) => Value::String(fmt_f64(*x)),
            Cell::Int(k) => json!(k),
            Cell::Text(s) => Value::String((*s).to_string()),
        }
    }
}

/// 9 significant digits, `inf`/`nan` literals for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.8e}")
    }
}

/// One command's result: fixed columns, rows of cells, and the resolved
/// parameters that produced them. The last column is always `status`.
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub parameters: Vec<(&'static str, Value)>,
}

impl Table {
    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// 0 when every row's status is `ok`, 2 otherwise (partial failure).
    pub fn exit_code(&self) -> u8 {
        debug_assert_eq!(self.columns.last(), Some(&"status"));
        let all_ok = self
            .rows
            .iter()
            .all(|row| matches!(row.last(), Some(Cell::Text("ok"))));
        if all_ok {
            0
        } else {
            2
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> String {
        let mut params = Map::new();
        for (key, value) in &self.parameters {
            params.insert((*key).to_string(), value.clone());
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert((*col).to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "metadata": {
                "command": self.command,
                "version": env!("CARGO_PKG_VERSION"),
                "parameters": Value::Object(params),
            },
            "rows": rows,
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("static value serializes");
        out.push('\n');
        out
    }
}
