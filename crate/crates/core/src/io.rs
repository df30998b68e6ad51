//! File formats: matrices as JSON `{"n": ..., "rows": [[...]]}` or headerless
//! CSV, step graphons as JSON `{"m": ..., "values": [[...]]}` or 1-based
//! "u v" edge lists. Floats are written shortest-roundtrip, so a write/read
//! cycle reproduces the exact same numbers.

use crate::graphon::{GraphonError, StepGraphon};
use crate::matrix::{Matrix, MatrixError};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("{path}: {source}")]
    BadMatrix {
        path: String,
        #[source]
        source: MatrixError,
    },
    #[error("{path}: {source}")]
    BadGraphon {
        path: String,
        #[source]
        source: GraphonError,
    },
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: display(path), source })
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    n: usize,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct GraphonFile {
    m: usize,
    values: Vec<Vec<f64>>,
}

fn parse_csv_rows(text: &str, path: &Path) -> Result<Vec<Vec<f64>>, IoError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(IoError::Parse {
                    path: display(path),
                    msg: format!("line {}: {e}", idx + 1),
                })
            }
        }
    }
    Ok(rows)
}

fn looks_like_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

/// Reads a square matrix. `.json` files (or files starting with `{`) use the
/// JSON layout; anything else is headerless CSV, one row per line.
pub fn read_matrix(path: &Path) -> Result<Matrix, IoError> {
    let text = read_to_string(path)?;
    let wrap = |source| IoError::BadMatrix { path: display(path), source };
    let is_json = path.extension().is_some_and(|e| e == "json") || looks_like_json(&text);
    let rows = if is_json {
        let file: MatrixFile = serde_json::from_str(&text)
            .map_err(|e| IoError::Parse { path: display(path), msg: e.to_string() })?;
        if file.rows.len() != file.n {
            return Err(IoError::Parse {
                path: display(path),
                msg: format!("declared n = {} but found {} rows", file.n, file.rows.len()),
            });
        }
        file.rows
    } else {
        parse_csv_rows(&text, path)?
    };
    Matrix::from_rows(rows).map_err(wrap)
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<(), IoError> {
    let is_json = path.extension().is_some_and(|e| e == "json");
    let rows: Vec<Vec<f64>> = (0..m.n()).map(|i| m.row(i).to_vec()).collect();
    let text = if is_json {
        let mut s = serde_json::to_string_pretty(&MatrixFile { n: m.n(), rows })
            .expect("matrix serialization");
        s.push('\n');
        s
    } else {
        let mut s = String::new();
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    };
    fs::write(path, text).map_err(|source| IoError::Io { path: display(path), source })
}

/// Reads a step graphon. JSON files use `{"m", "values"}`; anything else is
/// parsed as an edge list and converted to the associated graphon.
pub fn read_graphon(path: &Path) -> Result<StepGraphon, IoError> {
    let text = read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e == "json") || looks_like_json(&text);
    if is_json {
        let file: GraphonFile = serde_json::from_str(&text)
            .map_err(|e| IoError::Parse { path: display(path), msg: e.to_string() })?;
        if file.values.len() != file.m {
            return Err(IoError::Parse {
                path: display(path),
                msg: format!("declared m = {} but found {} rows", file.m, file.values.len()),
            });
        }
        let values = Matrix::from_rows(file.values)
            .map_err(|source| IoError::BadMatrix { path: display(path), source })?;
        Ok(StepGraphon::from_matrix(&values, false))
    } else {
        StepGraphon::from_edge_list(&text)
            .map_err(|source| IoError::BadGraphon { path: display(path), source })
    }
}

pub fn write_graphon(path: &Path, w: &StepGraphon) -> Result<(), IoError> {
    let values: Vec<Vec<f64>> = (0..w.m()).map(|i| w.values().row(i).to_vec()).collect();
    let mut text = serde_json::to_string_pretty(&GraphonFile { m: w.m(), values })
        .expect("graphon serialization");
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Io { path: display(path), source })
}
