//! Tabular experiment reports with deterministic CSV and JSON renderings.
//!
//! Byte determinism is part of the contract: identical computations must emit
//! identical bytes no matter the thread count or the wall clock, so floats
//! render through the shortest-roundtrip formatter, JSON objects keep a fixed
//! key order, and timing lives in the in-memory metadata only, never in the
//! serialized forms.

use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    fn to_json_value(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => {
                serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or_else(|| json!(v.to_string()))
            }
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) => write!(f, "{}", csv_quote(v)),
        }
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Run parameters recorded alongside the table. `wall_clock_ms` is kept for
/// callers (the CLI reports it on stderr) but stays out of both renderings.
#[derive(Debug, Clone, Default)]
pub struct ReportMetadata {
    pub seed: Option<u64>,
    pub enum_cap: usize,
    pub generator: String,
    pub tolerances: BTreeMap<String, f64>,
    pub wall_clock_ms: Option<u128>,
}

impl ReportMetadata {
    pub fn with_tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub id: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: ReportMetadata,
}

impl ExperimentReport {
    pub fn new(id: &str, columns: &[&str], metadata: ReportMetadata) -> Self {
        ExperimentReport {
            id: id.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch in report {}", self.id);
        self.rows.push(row);
    }

    /// True when every row passes; vacuously true without a pass column.
    pub fn all_pass(&self) -> bool {
        match self.columns.iter().position(|c| c == "pass") {
            None => true,
            Some(idx) => self.rows.iter().all(|r| r[idx] == Cell::Bool(true)),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.iter().map(|c| csv_quote(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::to_string).collect::<Vec<_>>().join(","));
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
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert(col.clone(), cell.to_json_value());
                }
                Value::Object(obj)
            })
            .collect();
        let tolerances: Map<String, Value> = self
            .metadata
            .tolerances
            .iter()
            .map(|(k, v)| {
                (k.clone(), serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null))
            })
            .collect();
        let doc = json!({
            "id": self.id,
            "columns": self.columns,
            "rows": rows,
            "metadata": {
                "seed": self.metadata.seed,
                "enum_cap": self.metadata.enum_cap,
                "generator": self.metadata.generator,
                "tolerances": tolerances,
            },
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format {other:?}; expected json or csv")),
        }
    }
}

pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    dest: &mut dyn io::Write,
) -> io::Result<()> {
    dest.write_all(report.render(format).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let meta = ReportMetadata {
            seed: Some(7),
            enum_cap: 25,
            generator: "chacha8".into(),
            tolerances: BTreeMap::new(),
            wall_clock_ms: Some(123),
        }
        .with_tolerance("cross_check", 1e-12);
        let mut r = ExperimentReport::new("demo", &["n", "value", "pass"], meta);
        r.push_row(vec![Cell::Int(2), Cell::Float(0.25), Cell::Bool(true)]);
        r.push_row(vec![Cell::Int(3), Cell::Float(1.0 / 3.0), Cell::Bool(true)]);
        r
    }

    #[test]
    fn csv_layout_and_float_formatting() {
        let csv = sample().to_csv();
        assert_eq!(csv, "n,value,pass\n2,0.25,true\n3,0.3333333333333333,true\n");
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = ExperimentReport::new("empty", &["a", "b"], ReportMetadata::default());
        assert_eq!(r.to_csv(), "a,b\n");
        assert!(r.all_pass());
    }

    #[test]
    fn json_mirrors_columns_and_hides_wall_clock() {
        let j = sample().to_json();
        assert!(j.contains("\"cross_check\": 1e-12") || j.contains("\"cross_check\": 0.000000000001"), "{j}");
        assert!(j.contains("\"generator\": \"chacha8\""));
        assert!(!j.contains("wall_clock"), "timing must not enter the serialized report");
        let n_pos = j.find("\"n\": 2").unwrap();
        let v_pos = j.find("\"value\": 0.25").unwrap();
        assert!(n_pos < v_pos, "row keys follow column order");
    }

    #[test]
    fn rendering_is_repeatable() {
        let r = sample();
        assert_eq!(r.to_csv(), r.to_csv());
        assert_eq!(r.to_json(), r.to_json());
    }

    #[test]
    fn all_pass_detects_failures() {
        let mut r = ExperimentReport::new("demo", &["pass"], ReportMetadata::default());
        r.push_row(vec![Cell::Bool(true)]);
        assert!(r.all_pass());
        r.push_row(vec![Cell::Bool(false)]);
        assert!(!r.all_pass());
    }

    #[test]
    fn csv_quotes_awkward_text() {
        let mut r = ExperimentReport::new("demo", &["note"], ReportMetadata::default());
        r.push_row(vec![Cell::text("a,b \"c\"")]);
        assert_eq!(r.to_csv(), "note\n\"a,b \"\"c\"\"\"\n");
    }

    #[test]
    fn emit_writes_rendered_bytes() {
        let r = sample();
        let mut buf = Vec::new();
        emit_report(&r, ReportFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), r.to_csv());
    }
}
