//! Matrix and vector CSV.
//!
//! The first line is `rows,cols`; each following line holds one row of
//! comma-separated floats printed in shortest round-trip form, so a
//! write/read cycle reproduces every bit. Vectors are `n x 1` matrices;
//! a single `1 x n` row is accepted on input too.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("line {line}"),
        message: message.into(),
    }
}

pub fn write_matrix<W: Write>(matrix: &DenseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "{},{}", matrix.rows(), matrix.cols())?;
    let mut line = String::new();
    for i in 0..matrix.rows() {
        line.clear();
        for j in 0..matrix.cols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:?}", matrix.get(i, j)));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(input: R) -> Result<DenseMatrix> {
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_error(1, "empty file, expected header `rows,cols`"))??;
    let dims: Vec<&str> = header.trim().split(',').collect();
    if dims.len() != 2 {
        return Err(parse_error(
            1,
            format!("expected header `rows,cols`, got `{header}`"),
        ));
    }
    let parse_dim = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|e| parse_error(1, format!("bad dimension `{s}`: {e}")))
    };
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    if rows == 0 || cols == 0 {
        return Err(parse_error(
            1,
            format!("dimensions must be positive, got {rows}x{cols}"),
        ));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        seen += 1;
        if seen > rows {
            return Err(parse_error(line_no, format!("more than {rows} data rows")));
        }
        let before = entries.len();
        for (field_no, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|e| {
                parse_error(
                    line_no,
                    format!("field {}: `{}`: {e}", field_no + 1, field.trim()),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_error(
                    line_no,
                    format!("field {} is not finite", field_no + 1),
                ));
            }
            entries.push(v);
        }
        if entries.len() - before != cols {
            return Err(parse_error(
                line_no,
                format!("expected {cols} fields, found {}", entries.len() - before),
            ));
        }
    }
    if seen != rows {
        return Err(parse_error(
            seen + 2,
            format!("expected {rows} data rows, found {seen}"),
        ));
    }
    DenseMatrix::from_row_major(rows, cols, &entries)
}

pub fn write_vector<W: Write>(v: &[f64], out: W) -> Result<()> {
    write_matrix(&DenseMatrix::from_col_major(v.len(), 1, v.to_vec())?, out)
}

pub fn read_vector<R: Read>(input: R) -> Result<Vec<f64>> {
    let m = read_matrix(input)?;
    if m.cols() == 1 || m.rows() == 1 {
        Ok(m.to_row_major())
    } else {
        Err(Error::Parse {
            location: "line 1".into(),
            message: format!(
                "expected a single row or column, got {}x{}",
                m.rows(),
                m.cols()
            ),
        })
    }
}

pub fn save_matrix(matrix: &DenseMatrix, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| locate(e.into(), path))?;
    write_matrix(matrix, std::io::BufWriter::new(file)).map_err(|e| locate(e, path))
}

pub fn load_matrix(path: &Path) -> Result<DenseMatrix> {
    let file = fs::File::open(path).map_err(|e| locate(e.into(), path))?;
    read_matrix(file).map_err(|e| locate(e, path))
}

pub fn save_vector(v: &[f64], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| locate(e.into(), path))?;
    write_vector(v, std::io::BufWriter::new(file)).map_err(|e| locate(e, path))
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    let file = fs::File::open(path).map_err(|e| locate(e.into(), path))?;
    read_vector(file).map_err(|e| locate(e, path))
}

fn locate(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}:{location}", path.display()),
            message,
        },
        Error::Io(e) => Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )),
        other => other,
    }
}
