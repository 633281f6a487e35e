//! Reading numeric samples.
//!
//! Plain files hold one value per line; blank lines and anything after `#`
//! are ignored. CSV files need a header row and a column selector, either a
//! header name or a 1-based index.

use std::path::Path;

use crate::error::CliError;

pub fn parse_values(text: &str, path: &Path) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        out.push(parse_number(body, path, i + 1)?);
    }
    Ok(out)
}

fn parse_number(s: &str, path: &Path, line: usize) -> Result<f64, CliError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Data {
            path: path.to_path_buf(),
            line,
            msg: format!("not a finite number: {s:?}"),
        }),
    }
}

pub fn parse_csv_column(text: &str, column: &str, path: &Path) -> Result<Vec<f64>, CliError> {
    let data_err = |line, msg: String| CliError::Data {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| data_err(1, e.to_string()))?
        .clone();
    let idx = match headers.iter().position(|h| h.trim() == column) {
        Some(i) => i,
        None => match column.parse::<usize>() {
            Ok(k) if k >= 1 && k <= headers.len() => k - 1,
            _ => return Err(data_err(1, format!("no column {column:?}"))),
        },
    };
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| data_err(line, e.to_string()))?;
        let field = record
            .get(idx)
            .ok_or_else(|| data_err(line, "missing field".to_string()))?;
        out.push(parse_number(field.trim(), path, line)?);
    }
    Ok(out)
}

/// Reads a sample from `path`, as CSV when `column` is given.
pub fn read_values(path: &Path, column: Option<&str>) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let values = match column {
        Some(c) => parse_csv_column(&text, c, path)?,
        None => parse_values(&text, path)?,
    };
    if values.is_empty() {
        return Err(CliError::Data {
            path: path.to_path_buf(),
            line: 0,
            msg: "no values".to_string(),
        });
    }
    Ok(values)
}
