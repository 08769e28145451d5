//! CSV exchange formats.
//!
//! All files use `,` separators, `.` decimals, LF line endings and UTF-8.
//! Reals are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::Summary;
use crate::error::{Error, Result};
use crate::gaussian::GpPosterior;
use crate::grid::{Field, Grid1D, ObservationSet};
use crate::scalar::Real;

/// 17 significant digits, scientific notation.
pub fn fmt_real<T: Real>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

fn push_row(out: &mut String, cols: &[String]) {
    out.push_str(&cols.join(","));
    out.push('\n');
}

fn fields_table<T: Real>(header: &str, grid: &Grid1D<T>, cols: &[&Field<T>]) -> Result<String> {
    for c in cols {
        if c.grid() != grid {
            return Err(Error::GridMismatch("columns live on different grids".into()));
        }
    }
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for i in 0..grid.n() {
        let mut row = vec![fmt_real(grid.point(i))];
        row.extend(cols.iter().map(|c| fmt_real(c.values()[i])));
        push_row(&mut out, &row);
    }
    Ok(out)
}

/// `t,value`
pub fn field_csv<T: Real>(field: &Field<T>) -> String {
    fields_table("t,value", field.grid(), &[field]).expect("single column")
}

/// `t,mean,sd`
pub fn gp_csv<T: Real>(post: &GpPosterior<T>) -> Result<String> {
    fields_table("t,mean,sd", post.mean.grid(), &[&post.mean, &post.sd])
}

/// `t,mean,sd,ci_lo,ci_hi`
pub fn summary_csv<T: Real>(s: &Summary<T>) -> Result<String> {
    fields_table("t,mean,sd,ci_lo,ci_hi", s.mean.grid(), &[&s.mean, &s.sd, &s.ci_lo, &s.ci_hi])
}

/// `lag,rho`
pub fn acf_csv<T: Real>(rho: &[T]) -> String {
    let mut out = String::from("lag,rho\n");
    for (lag, r) in rho.iter().enumerate() {
        let _ = writeln!(out, "{lag},{}", fmt_real(*r));
    }
    out
}

/// `t,ess,acf_lag100` (the lag is part of the column name).
pub fn ess_csv<T: Real>(grid: &Grid1D<T>, rows: &[(T, T)], lag: usize) -> Result<String> {
    if rows.len() != grid.n() {
        return Err(Error::LengthMismatch { expected: grid.n(), got: rows.len() });
    }
    let mut out = format!("t,ess,acf_lag{lag}\n");
    for (i, (e, r)) in rows.iter().enumerate() {
        push_row(&mut out, &[fmt_real(grid.point(i)), fmt_real(*e), fmt_real(*r)]);
    }
    Ok(out)
}

/// Header row of node coordinates, then one row per sample.
pub fn samples_csv_header<T: Real>(grid: &Grid1D<T>) -> String {
    let cols: Vec<String> = grid.points().into_iter().map(|t| format!("t={}", fmt_real(t))).collect();
    let mut s = cols.join(",");
    s.push('\n');
    s
}

pub fn samples_csv_row<T: Real>(sample: &Field<T>) -> String {
    let mut s = sample.values().iter().map(|&v| fmt_real(v)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

/// `# noise_sd=<value>` then `location,y`.
pub fn observations_csv<T: Real>(obs: &ObservationSet<T>) -> String {
    let mut out = format!("# noise_sd={}\nlocation,y\n", fmt_real(obs.noise_sd()));
    for (t, y) in obs.locations().iter().zip(obs.y()) {
        push_row(&mut out, &[fmt_real(*t), fmt_real(*y)]);
    }
    out
}

fn parse_real<T: Real>(s: &str, line: usize) -> Result<T> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: not a number: '{s}'")))?;
    T::from_f64(v).ok_or_else(|| Error::Parse(format!("line {line}: out of range: '{s}'")))
}

/// Parses a header-led numeric table; `#` lines are skipped.
pub fn parse_table<T: Real>(text: &str) -> Result<(Vec<String>, Vec<Vec<T>>)> {
    let mut header = None;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match &header {
            None => header = Some(line.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>()),
            Some(h) => {
                let row = line.split(',').map(|c| parse_real(c, idx + 1)).collect::<Result<Vec<T>>>()?;
                if row.len() != h.len() {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} columns, got {}",
                        idx + 1,
                        h.len(),
                        row.len()
                    )));
                }
                rows.push(row);
            }
        }
    }
    let header = header.ok_or_else(|| Error::Parse("empty table".into()))?;
    Ok((header, rows))
}

pub fn parse_observations<T: Real>(text: &str) -> Result<ObservationSet<T>> {
    let noise = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|l| l.trim().strip_prefix("noise_sd="))
        .ok_or_else(|| Error::Parse("missing '# noise_sd=' line".into()))?;
    let noise_sd = parse_real(noise, 1)?;
    let (header, rows) = parse_table::<T>(text)?;
    if header != ["location", "y"] {
        return Err(Error::Parse(format!("expected header 'location,y', got '{}'", header.join(","))));
    }
    let (locs, y) = rows.into_iter().map(|r| (r[0], r[1])).unzip();
    ObservationSet::new(locs, y, noise_sd)
}

/// Reads a `t,value` file back into a field on the uniform grid it describes.
pub fn parse_field<T: Real>(text: &str) -> Result<Field<T>> {
    let (header, rows) = parse_table::<T>(text)?;
    if header != ["t", "value"] {
        return Err(Error::Parse(format!("expected header 't,value', got '{}'", header.join(","))));
    }
    if rows.len() < 2 {
        return Err(Error::Parse("a field needs at least 2 rows".into()));
    }
    let grid = Grid1D::new(rows.len(), rows[0][0], rows[rows.len() - 1][0])?;
    Field::new(grid, rows.into_iter().map(|r| r[1]).collect())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
