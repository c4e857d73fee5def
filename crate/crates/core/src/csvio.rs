//! Deterministic CSV serialization for field matrices and diagnostic
//! tables. All floats are written in scientific notation with 17
//! significant digits, so values round-trip exactly and repeated runs with
//! the same inputs produce byte-identical artifacts; every writer has a
//! matching reader for round-trip checks.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

fn fmt(v: f64) -> String {
    // 17 significant digits: every f64 round-trips exactly.
    format!("{v:.16e}")
}

/// Writes a space–time matrix: header row = time values (first cell `x`),
/// one row per grid node: `x_i, value(x_i, t_0), value(x_i, t_1), …`.
/// `rows[n][i]` is indexed time-major, matching the field types.
pub fn write_matrix(path: &Path, xs: &[f64], times: &[f64], rows: &[Vec<f64>]) -> Result<()> {
    if rows.len() != times.len() || rows.iter().any(|r| r.len() != xs.len()) {
        return Err(Error::GridMismatch("matrix dimensions disagree with axes".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = std::iter::once("x".to_string()).chain(times.iter().map(|&t| fmt(t))).collect();
    writeln!(w, "{}", header.join(","))?;
    for (i, &x) in xs.iter().enumerate() {
        let mut cells = Vec::with_capacity(times.len() + 1);
        cells.push(fmt(x));
        for row in rows {
            cells.push(fmt(row[i]));
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads a matrix written by [`write_matrix`]; returns `(xs, times, rows)`
/// with `rows` time-major.
pub fn read_matrix(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty matrix file", path.display())))??;
    let times: Vec<f64> = header
        .split(',')
        .skip(1)
        .map(parse_float)
        .collect::<Result<_>>()?;
    let mut xs = Vec::new();
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); times.len()];
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        xs.push(parse_float(cells.next().unwrap_or(""))?);
        for (n, cell) in cells.enumerate() {
            if n >= times.len() {
                return Err(Error::Config(format!("{}: ragged matrix row", path.display())));
            }
            rows[n].push(parse_float(cell)?);
        }
    }
    Ok((xs, times, rows))
}

/// Writes a table of named columns of equal length.
pub fn write_table(path: &Path, headers: &[&str], columns: &[Vec<f64>]) -> Result<()> {
    if headers.len() != columns.len() {
        return Err(Error::GridMismatch("header/column count mismatch".into()));
    }
    let len = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != len) {
        return Err(Error::GridMismatch("table columns have unequal length".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", headers.join(","))?;
    for r in 0..len {
        let cells: Vec<String> = columns.iter().map(|c| fmt(c[r])).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads a table written by [`write_table`]; returns `(headers, columns)`.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty table file", path.display())))??;
    let headers: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != headers.len() {
            return Err(Error::Config(format!("{}: ragged table row", path.display())));
        }
        for (c, cell) in cells.iter().enumerate() {
            columns[c].push(parse_float(cell)?);
        }
    }
    Ok((headers, columns))
}

fn parse_float(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("unparseable numeric cell `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let dir = std::env::temp_dir().join("lcwave_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("matrix.csv");
        let xs = vec![-1.0, 0.0, 1.0];
        let times = vec![0.0, 0.5];
        let rows = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]];
        write_matrix(&path, &xs, &times, &rows).unwrap();
        let (xs2, times2, rows2) = read_matrix(&path).unwrap();
        assert_eq!(xs, xs2);
        assert_eq!(times, times2);
        assert_eq!(rows, rows2);
    }

    #[test]
    fn table_round_trip_and_determinism() {
        let dir = std::env::temp_dir().join("lcwave_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("table.csv");
        let cols = vec![vec![0.1, 0.2], vec![1.0 / 3.0, 2.0 / 3.0]];
        write_table(&path, &["t", "value"], &cols).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let (headers, cols2) = read_table(&path).unwrap();
        assert_eq!(headers, vec!["t", "value"]);
        assert_eq!(cols, cols2);
        write_table(&path, &["t", "value"], &cols).unwrap();
        assert_eq!(bytes1, std::fs::read(&path).unwrap());
    }
}
