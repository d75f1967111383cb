//! CSV formats for matrices and vectors, plus float-serialization policy.
//!
//! Matrices are written one row per line, comma-separated, no header.
//! Vectors are a single column. Floats carry 17 significant digits so a
//! write/read round trip is exact. JSON reports never contain NaN/Inf
//! literals; infinities serialize as the strings `"+inf"` / `"-inf"`.

use std::path::Path;

use serde::Serializer;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// 17 significant digits, enough for an exact f64 round trip.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format_sig17(m.get(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row: Vec<f64> = trimmed
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    Matrix::from_rows(&rows)
}

pub fn vector_to_csv(v: &[f64]) -> String {
    let mut out = String::new();
    for x in v {
        out.push_str(&format_sig17(*x));
        out.push('\n');
    }
    out
}

pub fn vector_from_csv(text: &str) -> Result<Vec<f64>> {
    let m = matrix_from_csv(text)?;
    if m.cols() != 1 {
        return Err(Error::Parse(format!(
            "expected a single-column vector, found {} columns",
            m.cols()
        )));
    }
    Ok(m.entries().to_vec())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    matrix_from_csv(&std::fs::read_to_string(path)?)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    vector_from_csv(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    Ok(std::fs::write(path, matrix_to_csv(m))?)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    Ok(std::fs::write(path, vector_to_csv(v))?)
}

/// Serializes a float as a JSON number, or as `"+inf"` / `"-inf"` strings.
pub fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("+inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// `Option` variant of [`serialize_extended`]; `None` becomes JSON null.
pub fn serialize_opt_extended<S: Serializer>(
    v: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(x) => serialize_extended(x, s),
    }
}

/// CSV cell for a possibly infinite or missing value.
pub fn csv_cell(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x.is_finite() => format_sig17(x),
        Some(x) if x > 0.0 => "+inf".into(),
        Some(_) => "-inf".into(),
    }
}
