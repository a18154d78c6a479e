//! CSV reading and writing for curves (`freq_hz,<value>`) and single
//! value columns. Parse failures report the 1-based file line number.

use std::path::Path;

use crate::error::{Error, Result};

fn csv_err(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(e) => Error::Io {
                path: path.to_path_buf(),
                source: e,
            },
            _ => unreachable!("is_io_error guaranteed an Io kind"),
        }
    } else {
        Error::Csv {
            path: path.to_path_buf(),
            line,
            detail: err.to_string(),
        }
    }
}

fn column_index(path: &Path, headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            detail: format!(
                "missing column '{name}' (found: {})",
                headers.iter().collect::<Vec<_>>().join(", ")
            ),
        })
}

fn parse_field(path: &Path, line: u64, name: &str, raw: &str) -> Result<f64> {
    let trimmed = raw.trim();
    trimmed.parse::<f64>().map_err(|_| Error::Csv {
        path: path.to_path_buf(),
        line,
        detail: format!("column '{name}': '{trimmed}' is not a number"),
    })
}

/// Reads two named numeric columns from a headed CSV file.
pub fn read_two_columns(path: &Path, col_a: &str, col_b: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let ia = column_index(path, &headers, col_a)?;
    let ib = column_index(path, &headers, col_b)?;

    let mut a = Vec::new();
    let mut b = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        a.push(parse_field(path, line, col_a, &record[ia])?);
        b.push(parse_field(path, line, col_b, &record[ib])?);
    }
    Ok((a, b))
}

/// Reads one named numeric column from a headed CSV file.
pub fn read_single_column(path: &Path, col: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx = column_index(path, &headers, col)?;

    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        values.push(parse_field(path, line, col, &record[idx])?);
    }
    Ok(values)
}

/// Writes a two-column CSV with the given headers. Values print with
/// enough digits to round-trip f64 exactly.
pub fn write_two_columns(
    path: &Path,
    header_a: &str,
    header_b: &str,
    a: &[f64],
    b: &[f64],
) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::parameter(
            "columns",
            format!("column lengths differ: {} vs {}", a.len(), b.len()),
        ));
    }
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer
        .write_record([header_a, header_b])
        .map_err(|e| csv_err(path, e))?;
    for (x, y) in a.iter().zip(b) {
        writer
            .write_record([format!("{x}"), format!("{y}")])
            .map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
