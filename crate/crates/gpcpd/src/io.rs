//! File formats: one-column value CSV for series, dense run-length matrix
//! CSV, and JSON helpers.

use std::io::Write;
use std::path::Path;

use crate::bocpd::RunLengthPosterior;
use crate::error::{Error, Result};
use crate::gp::Series;

fn invalid_data(why: impl Into<String>) -> Error {
    Error::invalid("data file", why)
}

/// Reads a series from CSV. Single-column files may carry one header row.
/// Multi-column files need a `column` selector, either a 0-based index or a
/// header name.
pub fn read_series_csv(path: &Path, column: Option<&str>) -> Result<Series> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push(rec);
    }
    if rows.is_empty() {
        return Err(invalid_data("file contains no rows"));
    }
    let width = rows[0].len();
    let col_idx = match column {
        None => {
            if width != 1 {
                return Err(invalid_data(format!(
                    "{width} columns found; pass --column to select one"
                )));
            }
            0
        }
        Some(sel) => match sel.parse::<usize>() {
            Ok(i) if i < width => i,
            Ok(i) => {
                return Err(invalid_data(format!(
                    "column index {i} out of range for {width} columns"
                )))
            }
            Err(_) => {
                let header = &rows[0];
                header
                    .iter()
                    .position(|h| h == sel)
                    .ok_or_else(|| invalid_data(format!("no column named `{sel}`")))?
            }
        },
    };
    // Skip a single leading header row when its selected field is not a number.
    let start = if rows[0]
        .get(col_idx)
        .map_or(true, |f| f.parse::<f64>().is_err())
    {
        1
    } else {
        0
    };
    let mut values = Vec::with_capacity(rows.len());
    for (i, rec) in rows.iter().enumerate().skip(start) {
        let field = rec
            .get(col_idx)
            .ok_or_else(|| invalid_data(format!("row {} is missing column {col_idx}", i + 1)))?;
        let v: f64 = field
            .parse()
            .map_err(|_| invalid_data(format!("row {}: `{field}` is not a number", i + 1)))?;
        values.push(v);
    }
    Series::new(values)
}

/// Writes a series as a one-column CSV with a `value` header.
pub fn write_series_csv(path: &Path, series: &Series) -> Result<()> {
    let mut out = String::from("value\n");
    for v in series.values() {
        out.push_str(&format!("{v}\n"));
    }
    write_file(path, out.as_bytes())
}

/// Dense run-length matrix: one row per step, one column per run length,
/// linear probabilities (cells beyond a row's support are zero).
pub fn write_runlength_csv(path: &Path, posterior: &RunLengthPosterior) -> Result<()> {
    let steps = posterior.steps();
    let width = (1..=steps)
        .map(|t| posterior.log_row(t).len())
        .max()
        .unwrap_or(0);
    let mut out = String::from("t");
    for r in 0..width {
        out.push_str(&format!(",r{r}"));
    }
    out.push('\n');
    for t in 1..=steps {
        out.push_str(&t.to_string());
        for r in 0..width {
            out.push_str(&format!(",{}", posterior.prob(t, r)));
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::invalid("json", e.to_string()))?;
    write_file(path, body.as_bytes())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&body).map_err(|e| invalid_data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
