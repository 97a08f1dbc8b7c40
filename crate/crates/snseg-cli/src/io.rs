//! CSV ingestion/emission and atomic file writes.

use anyhow::{bail, Context, Result};
use std::io::Write;
use std::path::Path;

use snseg::TimeSeriesMatrix;

/// Write through a temp file in the target directory and rename, so
/// readers never observe a partial artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .context("creating temporary file")?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Read a CSV of one column per series. A single header row is
/// auto-detected: if any cell of the first row fails to parse as a number,
/// the row is treated as column names.
pub fn read_csv_matrix(path: &Path) -> Result<TimeSeriesMatrix> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut p = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            cells.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => {
                if rows.is_empty() {
                    p = vals.len();
                } else if vals.len() != p {
                    bail!(
                        "line {}: expected {} columns, found {}",
                        lineno + 1,
                        p,
                        vals.len()
                    );
                }
                rows.push(vals);
            }
            Err(_) => {
                if rows.is_empty() && lineno == 0 {
                    p = cells.len(); // header row
                } else {
                    bail!("line {}: non-numeric cell in '{line}'", lineno + 1);
                }
            }
        }
    }
    if rows.is_empty() {
        bail!("{} holds no data rows", path.display());
    }
    let n = rows.len();
    let columns: Vec<Vec<f64>> = (0..p)
        .map(|s| (0..n).map(|t| rows[t][s]).collect())
        .collect();
    Ok(TimeSeriesMatrix::from_columns(columns)?)
}

/// Emit one column per series at 17 significant digits (full f64
/// round-trip precision).
pub fn matrix_to_csv(ts: &TimeSeriesMatrix) -> String {
    let mut out = String::new();
    for t in 1..=ts.n() {
        for s in 0..ts.p() {
            if s > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", ts.value(t, s)));
        }
        out.push('\n');
    }
    out
}
