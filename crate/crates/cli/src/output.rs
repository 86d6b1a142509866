//! Result tables in CSV or JSON with fixed numeric formatting.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Fixed-point rendering with 9 significant digits; identical input gives identical text.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).clamp(0, 40) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit (9.999999999 -> 10.00000000)
    if decimals > 0 && significant(&s) > 9 {
        return format!("{x:.prec$}", prec = decimals - 1);
    }
    s
}

fn significant(s: &str) -> usize {
    s.trim_start_matches('-')
        .trim_start_matches(['0', '.'])
        .chars()
        .filter(char::is_ascii_digit)
        .count()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sig9(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => t.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn json(&self) -> Value {
        match self {
            Cell::Num(x) => number(*x),
            Cell::Int(n) => Value::from(*n),
            Cell::Text(t) => Value::from(t.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// JSON number carrying exactly the 9-significant-digit value; non-finite values become null.
pub fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = sig9(x).parse().expect("sig9 output parses");
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

/// A document: configuration echo, a row table and summary values.
pub struct Report {
    pub config: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(&'static str, Cell)>,
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            config: Map::new(),
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: Value) -> &mut Self {
        self.config.insert(key.to_owned(), value);
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
        self
    }

    pub fn summary(&mut self, key: &'static str, cell: Cell) -> &mut Self {
        self.summary.push((key, cell));
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `key: value` lines for the summary, shown beside CSV output.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.summary {
            let _ = writeln!(out, "{k}: {}", v.csv());
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| ((*c).to_owned(), v.json()))
                        .collect(),
                )
            })
            .collect();
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| ((*k).to_owned(), v.json())).collect();
        let doc = serde_json::json!({
            "config": Value::Object(self.config.clone()),
            "rows": rows,
            "summary": summary,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        s.push('\n');
        s
    }

    /// Write to `path` or stdout. With CSV the summary goes to stderr (or
    /// stdout after the table when writing to a file) so the table stays clean.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> std::io::Result<()> {
        let body = match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        };
        match path {
            Some(p) => {
                std::fs::write(p, body)?;
                if format == Format::Csv {
                    print!("{}", self.summary_text());
                }
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes())?;
                out.flush()?;
                if format == Format::Csv {
                    eprint!("{}", self.summary_text());
                }
            }
        }
        Ok(())
    }
}
