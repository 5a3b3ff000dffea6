//! CSV exchange for matrices and data tables.
//!
//! Files are comma separated with `.` decimals. A single header line is
//! optional and detected by the presence of a non-numeric field.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

/// Machine-output formatting: 15 digits after the point in scientific form.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "Inf" } else { "-Inf" }.to_string()
    } else {
        format!("{x:.15e}")
    }
}

/// Parses a numeric table. Rows must all have the same width.
pub fn read_table<R: Read>(input: R) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if line == 0 => continue,
            Err(_) => {
                return Err(Error::Malformed(format!("line {}: non-numeric field", line + 1)));
            }
        }
    }
    let width = rows.first().map(Vec::len).ok_or_else(|| Error::Malformed("no data rows".into()))?;
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::Malformed(format!(
            "data row {} has {} fields, expected {width}",
            i + 1,
            rows[i].len()
        )));
    }
    let n = rows.len();
    Array2::from_shape_vec((n, width), rows.into_iter().flatten().collect())
        .map_err(|e| Error::Malformed(e.to_string()))
}

pub fn read_table_file(path: &Path) -> Result<Array2<f64>> {
    read_table(File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
}

pub fn read_matrix<R: Read>(input: R) -> Result<SymmetricMatrix> {
    let a = read_table(input)?;
    if a.nrows() != a.ncols() {
        return Err(Error::Malformed(format!("matrix is {}×{}, expected square", a.nrows(), a.ncols())));
    }
    SymmetricMatrix::new(a)
}

pub fn read_matrix_file(path: &Path) -> Result<SymmetricMatrix> {
    read_matrix(File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
}

/// Writes rows of `a`, preceded by `header` when given.
pub fn write_table<W: Write>(out: W, a: &Array2<f64>, header: Option<&[String]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for row in a.rows() {
        w.write_record(row.iter().map(|&x| fmt_num(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix<W: Write>(out: W, m: &SymmetricMatrix) -> Result<()> {
    write_table(out, m.as_array(), None)
}
