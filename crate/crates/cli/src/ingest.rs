//! Dataset readers and writers for CSV and fvec files.
//!
//! CSV: one vector per line, comma-separated decimal floats. Empty lines are
//! skipped. fvec: each record is a little-endian `u32` dimension followed by
//! that many little-endian `f32` values.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use certann::Dataset;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Fvec,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Fvec => "fvec",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "fvec" | "fvecs" | "fvec-binary" => Ok(Format::Fvec),
            other => Err(format!("unknown format '{other}' (expected csv or fvec)")),
        }
    }
}

pub fn ingest(path: &Path, format: Format) -> CliResult<Dataset> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let parsed = match format {
        Format::Csv => {
            let text =
                std::str::from_utf8(&bytes).map_err(|_| CliError::Data("csv input is not valid UTF-8".into()))?;
            parse_csv(text)
        }
        Format::Fvec => parse_fvec(&bytes),
    };
    parsed.map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses one comma-separated vector; used for both files and `--vector`.
pub fn parse_vector(line: &str) -> Result<Vec<f64>, String> {
    line.split(',')
        .enumerate()
        .map(|(col, cell)| {
            let cell = cell.trim();
            let v: f64 = cell.parse().map_err(|_| format!("column {}: not a number: '{cell}'", col + 1))?;
            if !v.is_finite() {
                return Err(format!("column {}: non-finite value '{cell}'", col + 1));
            }
            Ok(v)
        })
        .collect()
}

pub fn parse_csv(text: &str) -> CliResult<Dataset> {
    let mut dataset: Option<Dataset> = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let row = parse_vector(line).map_err(|e| CliError::Data(format!("line {lineno}, {e}")))?;
        let ds = match dataset.as_mut() {
            Some(ds) => ds,
            None => dataset.insert(Dataset::new(row.len())?),
        };
        if row.len() != ds.dim() {
            return Err(CliError::Data(format!("line {lineno}: expected {} values, found {}", ds.dim(), row.len())));
        }
        ds.push(&row)?;
    }
    dataset.ok_or_else(|| CliError::Data("empty dataset".into()))
}

pub fn parse_fvec(bytes: &[u8]) -> CliResult<Dataset> {
    let mut dataset: Option<Dataset> = None;
    let mut pos = 0;
    let mut record = 0;
    let mut row = Vec::new();
    while pos < bytes.len() {
        record += 1;
        let header = bytes
            .get(pos..pos + 4)
            .ok_or_else(|| CliError::Data(format!("record {record}: truncated dimension header")))?;
        let dim = u32::from_le_bytes(header.try_into().expect("4 bytes")) as usize;
        pos += 4;
        if dim == 0 {
            return Err(CliError::Data(format!("record {record}: zero dimension")));
        }
        let body = dim
            .checked_mul(4)
            .and_then(|len| bytes.get(pos..pos + len))
            .ok_or_else(|| CliError::Data(format!("record {record}: truncated, expected {dim} floats")))?;
        pos += 4 * dim;
        row.clear();
        for (j, chunk) in body.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
            if !v.is_finite() {
                return Err(CliError::Data(format!("record {record}, component {}: non-finite value", j + 1)));
            }
            row.push(v as f64);
        }
        let ds = match dataset.as_mut() {
            Some(ds) => ds,
            None => dataset.insert(Dataset::new(dim)?),
        };
        if dim != ds.dim() {
            return Err(CliError::Data(format!("record {record}: dimension {dim} differs from {}", ds.dim())));
        }
        ds.push(&row)?;
    }
    dataset.ok_or_else(|| CliError::Data("empty dataset".into()))
}

/// Writes rows in the given format. CSV keeps full `f64` precision; fvec
/// stores `f32`.
pub fn write_rows<'a>(
    out: &mut impl Write,
    rows: impl IntoIterator<Item = &'a [f64]>,
    format: Format,
) -> std::io::Result<()> {
    for row in rows {
        match format {
            Format::Csv => {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
            Format::Fvec => {
                out.write_all(&(row.len() as u32).to_le_bytes())?;
                for v in row {
                    out.write_all(&(*v as f32).to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}
