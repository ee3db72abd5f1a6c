//! File formats: density grids and count series in CSV, atomic output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use priorsens_core::{DensityGrid, Scale};

use crate::error::{CliError, Result};

fn csv_error(path: &Path, source: csv::Error) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_f64(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| {
        CliError::Input(format!(
            "{}: line {line}: {what} {field:?} is not a number",
            path.display()
        ))
    })
}

/// Two-column `x,density` CSV with a header row.
pub fn read_density_grid(path: &Path, scale: Scale) -> Result<DensityGrid> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.len() != 2 {
        return Err(CliError::Input(format!(
            "{}: expected two columns (x,density), found {}",
            path.display(),
            headers.len()
        )));
    }
    let mut support = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        support.push(parse_f64(path, line, &record[0], "x")?);
        values.push(parse_f64(path, line, &record[1], "density")?);
    }
    DensityGrid::new(support, values, scale)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn density_grid_csv(grid: &DensityGrid) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "density"])
        .map_err(|e| csv_error(Path::new("<memory>"), e))?;
    for (x, v) in grid.support().iter().zip(grid.values()) {
        w.write_record([x.to_string(), v.to_string()])
            .map_err(|e| csv_error(Path::new("<memory>"), e))?;
    }
    w.into_inner()
        .map_err(|e| CliError::Input(format!("writing CSV: {e}")))
}

/// Monthly counts with optional calendar months.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pub counts: Vec<f64>,
    pub months: Option<Vec<u8>>,
}

/// Month of a `YYYY-MM` or `YYYY-MM-DD` date.
fn parse_month(date: &str) -> Option<u8> {
    let mut parts = date.trim().split('-');
    let year = parts.next()?;
    let month = parts.next()?;
    if year.len() != 4 || !year.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let m: u8 = month.parse().ok()?;
    (1..=12).contains(&m).then_some(m)
}

/// Count CSV with a header: either one column of counts or `date,count`.
pub fn read_counts(path: &Path) -> Result<CountSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let width = reader.headers().map_err(|e| csv_error(path, e))?.len();
    if !(1..=2).contains(&width) {
        return Err(CliError::Input(format!(
            "{}: expected one column of counts or date,count; found {width} columns",
            path.display()
        )));
    }
    let mut counts = Vec::new();
    let mut months = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let count = parse_f64(path, line, &record[width - 1], "count")?;
        if !(count > 0.0 && count.is_finite()) {
            return Err(CliError::Input(format!(
                "{}: line {line}: count {count} is not positive",
                path.display()
            )));
        }
        counts.push(count);
        if width == 2 {
            let m = parse_month(&record[0]).ok_or_else(|| {
                CliError::Input(format!(
                    "{}: line {line}: date {:?} is not YYYY-MM or YYYY-MM-DD",
                    path.display(),
                    &record[0]
                ))
            })?;
            months.push(m);
        }
    }
    if counts.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    Ok(CountSeries {
        counts,
        months: (width == 2).then_some(months),
    })
}

/// Write `bytes` to a temporary file next to `path`, then rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Input(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}
