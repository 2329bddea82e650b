//! Matrix files.
//!
//! A matrix file is UTF-8 JSON:
//!
//! ```text
//! {
//!   "dim": 2,
//!   "entries": [
//!     [[1.0000000000000000e0, 0.0000000000000000e0], [0.0000000000000000e0, 0.0000000000000000e0]],
//!     [[0.0000000000000000e0, 0.0000000000000000e0], [1.0000000000000000e0, 0.0000000000000000e0]]
//!   ],
//!   "metadata": {"name": "identity"}
//! }
//! ```
//!
//! `entries[r][c]` is the `[re, im]` pair of entry `(r, c)`. Floats are
//! written with 17 significant digits, which reproduces every `f64` exactly.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::Complex64;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("`{location}`: expected {expected}")]
    WrongType { location: String, expected: &'static str },

    #[error("`dim` must be at least 1")]
    ZeroDim,

    #[error("`entries` has {rows} rows but `dim` is {dim}")]
    RowCount { dim: usize, rows: usize },

    #[error("matrix is not square: `entries[{row}]` has {len} entries, expected {dim}")]
    NonSquare { row: usize, len: usize, dim: usize },

    #[error("`entries[{row}][{col}]`: {part} part is not a finite number")]
    NonFinite { row: usize, col: usize, part: &'static str },

    #[error("`axis[{index}]`: {part} part is not a finite number")]
    NonFiniteComponent { index: usize, part: &'static str },

    #[error("malformed report: {0}")]
    Report(String),
}

/// `x` with 17 significant digits, or `null` when not finite.
pub fn fmt_f17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// A float serialized with 17 significant digits. `null` reads back as NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(fmt_f17(self.0)).map_err(serde::ser::Error::custom)?.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(F17(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

pub fn f17_vec(v: &[f64]) -> Vec<F17> {
    v.iter().copied().map(F17).collect()
}

pub fn from_f17_vec(v: &[F17]) -> Vec<f64> {
    v.iter().map(|x| x.0).collect()
}

pub fn pair(z: Complex64) -> [F17; 2] {
    [F17(z.re), F17(z.im)]
}

/// Square matrix as nested `[re, im]` pairs, used inside reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<[F17; 2]>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let entries = (0..m.rows()).map(|r| (0..m.cols()).map(|c| pair(m[(r, c)])).collect()).collect();
        Self { dim: m.rows(), entries }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, FormatError> {
        let value = serde_json::to_value(self).map_err(|e| FormatError::Report(e.to_string()))?;
        matrix_from_value(&value)
    }
}

/// SHA-256 over the little-endian bytes of `(re, im)` of every entry in
/// row-major order.
pub fn matrix_digest(m: &ComplexMatrix) -> String {
    let mut h = Sha256::new();
    for z in m.to_row_major() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatrixMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFile {
    pub matrix: ComplexMatrix,
    pub metadata: Option<MatrixMetadata>,
}

impl MatrixFile {
    pub fn new(matrix: ComplexMatrix) -> Self {
        Self { matrix, metadata: None }
    }

    pub fn with_metadata(matrix: ComplexMatrix, metadata: MatrixMetadata) -> Self {
        Self { matrix, metadata: Some(metadata) }
    }

    pub fn parse_str(text: &str) -> Result<Self, FormatError> {
        let value = parse_json(text)?;
        let Value::Object(map) = &value else {
            return Err(FormatError::WrongType { location: "<root>".into(), expected: "an object" });
        };
        let matrix = matrix_from_value(&value)?;
        let metadata = match map.get("metadata") {
            None | Some(Value::Null) => None,
            Some(m) => Some(serde_json::from_value(m.clone()).map_err(|_| FormatError::WrongType {
                location: "metadata".into(),
                expected: "an object with optional `name`, `generator` and `params`",
            })?),
        };
        Ok(Self { matrix, metadata })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, FormatError> {
        Self::parse_str(&read_text(path.as_ref())?)
    }

    pub fn to_json_string(&self) -> String {
        let m = &self.matrix;
        let mut out = format!("{{\n  \"dim\": {},\n  \"entries\": [\n", m.rows());
        for r in 0..m.rows() {
            let row: Vec<String> =
                (0..m.cols()).map(|c| format!("[{}, {}]", fmt_f17(m[(r, c)].re), fmt_f17(m[(r, c)].im))).collect();
            let sep = if r + 1 < m.rows() { "," } else { "" };
            out.push_str(&format!("    [{}]{sep}\n", row.join(", ")));
        }
        out.push_str("  ]");
        if let Some(meta) = &self.metadata {
            let text = serde_json::to_string(meta).expect("metadata serializes");
            out.push_str(&format!(",\n  \"metadata\": {text}"));
        }
        out.push_str("\n}\n");
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), FormatError> {
        write_text(path.as_ref(), &self.to_json_string())
    }
}

/// Reads a matrix file and returns its matrix.
pub fn parse_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix, FormatError> {
    Ok(MatrixFile::read(path)?.matrix)
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    std::fs::write(path, text).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

/// Parses JSON, mapping bare `NaN`/`Infinity` tokens (which JSON lacks) to
/// `null` so that they surface as a non-finite entry with its indices.
pub fn parse_json(text: &str) -> Result<Value, FormatError> {
    match serde_json::from_str(text) {
        Ok(v) => Ok(v),
        Err(e) => {
            if let Some(sanitized) = replace_nonfinite_tokens(text) {
                if let Ok(v) = serde_json::from_str(&sanitized) {
                    return Ok(v);
                }
            }
            Err(FormatError::Syntax { line: e.line(), column: e.column(), message: e.to_string() })
        }
    }
}

fn replace_nonfinite_tokens(text: &str) -> Option<String> {
    const TOKENS: [&str; 6] = ["-Infinity", "Infinity", "-inf", "inf", "NaN", "nan"];
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut replaced = false;
    let mut rest = text;
    while let Some(ch) = rest.chars().next() {
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
        } else if ch == '"' {
            in_string = true;
        } else if let Some(t) = TOKENS.iter().find(|t| rest.starts_with(**t)) {
            out.push_str("null");
            rest = &rest[t.len()..];
            replaced = true;
            continue;
        }
        out.push(ch);
        rest = &rest[ch.len_utf8()..];
    }
    replaced.then_some(out)
}

fn number_at(v: &Value, row: usize, col: usize, part: &'static str, k: usize) -> Result<f64, FormatError> {
    match v {
        Value::Number(n) => n.as_f64().filter(|x| x.is_finite()).ok_or(FormatError::NonFinite { row, col, part }),
        Value::Null => Err(FormatError::NonFinite { row, col, part }),
        Value::String(s) if s.trim().parse::<f64>().is_ok_and(|x| !x.is_finite()) => {
            Err(FormatError::NonFinite { row, col, part })
        }
        _ => Err(FormatError::WrongType { location: format!("entries[{row}][{col}][{k}]"), expected: "a number" }),
    }
}

/// Validates `{dim, entries}` and builds the matrix.
pub fn matrix_from_value(value: &Value) -> Result<ComplexMatrix, FormatError> {
    let dim_v = value.get("dim").ok_or_else(|| FormatError::MissingField("dim".into()))?;
    let dim =
        dim_v.as_u64().ok_or(FormatError::WrongType { location: "dim".into(), expected: "a non-negative integer" })?
            as usize;
    if dim == 0 {
        return Err(FormatError::ZeroDim);
    }
    let rows = value
        .get("entries")
        .ok_or_else(|| FormatError::MissingField("entries".into()))?
        .as_array()
        .ok_or(FormatError::WrongType { location: "entries".into(), expected: "an array of rows" })?;
    if rows.len() != dim {
        return Err(FormatError::RowCount { dim, rows: rows.len() });
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (r, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or(FormatError::WrongType {
            location: format!("entries[{r}]"),
            expected: "an array of [re, im] pairs",
        })?;
        if row.len() != dim {
            return Err(FormatError::NonSquare { row: r, len: row.len(), dim });
        }
        for (c, z) in row.iter().enumerate() {
            let p = z.as_array().filter(|p| p.len() == 2).ok_or(FormatError::WrongType {
                location: format!("entries[{r}][{c}]"),
                expected: "an [re, im] pair",
            })?;
            let re = number_at(&p[0], r, c, "real", 0)?;
            let im = number_at(&p[1], r, c, "imaginary", 1)?;
            data.push(Complex64::new(re, im));
        }
    }
    Ok(ComplexMatrix::from_row_major(dim, dim, data).expect("dim x dim entries"))
}

/// Reads an axis file, `{"axis": [[re, im], ...]}`.
pub fn parse_axis_str(text: &str) -> Result<Vec<Complex64>, FormatError> {
    let value = parse_json(text)?;
    let items = value
        .get("axis")
        .ok_or_else(|| FormatError::MissingField("axis".into()))?
        .as_array()
        .ok_or(FormatError::WrongType { location: "axis".into(), expected: "an array of [re, im] pairs" })?;
    if items.is_empty() {
        return Err(FormatError::ZeroDim);
    }
    items
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let p = z
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or(FormatError::WrongType { location: format!("axis[{i}]"), expected: "an [re, im] pair" })?;
            let part = |k: usize, name: &'static str| match &p[k] {
                Value::Number(n) => {
                    n.as_f64().filter(|x| x.is_finite()).ok_or(FormatError::NonFiniteComponent { index: i, part: name })
                }
                Value::Null => Err(FormatError::NonFiniteComponent { index: i, part: name }),
                _ => Err(FormatError::WrongType { location: format!("axis[{i}][{k}]"), expected: "a number" }),
            };
            Ok(Complex64::new(part(0, "real")?, part(1, "imaginary")?))
        })
        .collect()
}
