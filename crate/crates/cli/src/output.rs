//! Tabular reports rendered as CSV or JSON with fixed 12-significant-digit
//! numbers, so identical runs give byte-identical files.

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Column-named rows plus `key: value` summary lines.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, String)>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Report { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.summary.push((key.into(), value.into()));
    }

    /// Renders the report. With `invocation`, CSV gets a `#` header carrying
    /// the command line and summary, and JSON is wrapped in an object.
    pub fn render(&self, format: Format, invocation: Option<&str>) -> String {
        match format {
            Format::Csv => self.csv(invocation),
            Format::Json => self.json(invocation),
        }
    }

    fn csv(&self, invocation: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(cmd) = invocation {
            out += &format!("# invocation: {cmd}\n");
            for (k, v) in &self.summary {
                out += &format!("# {k}: {v}\n");
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text)).expect("in-memory write");
        }
        out += &String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells");
        out
    }

    fn json(&self, invocation: Option<&str>) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(row.iter().map(cell_json)).collect()))
            .collect();
        let value = match invocation {
            None => Value::Array(rows),
            Some(cmd) => {
                let mut obj = Map::new();
                obj.insert("invocation".into(), Value::String(cmd.into()));
                let summary: Map<String, Value> =
                    self.summary.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
                obj.insert("summary".into(), Value::Object(summary));
                obj.insert("rows".into(), Value::Array(rows));
                Value::Object(obj)
            }
        };
        let mut s = serde_json::to_string_pretty(&value).expect("json values serialize");
        s.push('\n');
        s
    }
}

/// Twelve significant digits; plain notation for exponents in `[-5, 12)`,
/// scientific otherwise, trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(v) => fmt_num(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Flag(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        // Round-trip through the printed form so JSON and CSV carry the same digits.
        Cell::Num(v) => fmt_num(*v).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number),
        Cell::Int(v) => Value::from(*v),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Flag(b) => Value::Bool(*b),
        Cell::Empty => Value::Null,
    }
}
