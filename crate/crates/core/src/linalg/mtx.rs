//! Matrix Market (`.mtx`) and plain-text vector files.
//!
//! Coordinate files are written as `real general`; array files are written
//! column-major as the format requires. Reading accepts `general` and
//! `symmetric` real matrices in either layout.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum MarketMatrix {
    Sparse(SparseMatrix),
    Dense(DenseMatrix),
}

impl MarketMatrix {
    pub fn into_dense(self) -> DenseMatrix {
        match self {
            MarketMatrix::Sparse(s) => s.to_dense(),
            MarketMatrix::Dense(d) => d,
        }
    }

    pub fn into_sparse(self) -> SparseMatrix {
        match self {
            MarketMatrix::Sparse(s) => s,
            MarketMatrix::Dense(d) => SparseMatrix::from_dense(&d),
        }
    }
}

pub fn write_sparse(path: impl AsRef<Path>, m: &SparseMatrix) -> Result<()> {
    let mut out = String::with_capacity(40 * m.nnz() + 64);
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", m.nrows(), m.ncols(), m.nnz()));
    for (i, j, v) in m.triplets() {
        out.push_str(&format!("{} {} {:.17e}\n", i + 1, j + 1, v));
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_dense(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut out = String::with_capacity(26 * m.nrows() * m.ncols() + 64);
    out.push_str("%%MatrixMarket matrix array real general\n");
    out.push_str(&format!("{} {}\n", m.nrows(), m.ncols()));
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out.push_str(&format!("{:.17e}\n", m[(i, j)]));
        }
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<MarketMatrix> {
    parse(&fs::read_to_string(path)?)
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("invalid {what} {tok:?}")))
}

pub fn parse(text: &str) -> Result<MarketMatrix> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let h: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" {
        return Err(perr(1, "missing %%MatrixMarket matrix header"));
    }
    let coordinate = match h[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(perr(1, format!("unsupported layout {other}"))),
    };
    if h[3] != "real" && h[3] != "integer" {
        return Err(perr(1, format!("unsupported field {}", h[3])));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(perr(1, format!("unsupported symmetry {other}"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sl, size) = body.next().ok_or_else(|| perr(2, "missing size line"))?;
    let mut tok = size.split_whitespace();
    let rows: usize = num(tok.next(), sl, "row count")?;
    let cols: usize = num(tok.next(), sl, "column count")?;

    if coordinate {
        let nnz: usize = num(tok.next(), sl, "entry count")?;
        let mut t = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
        for _ in 0..nnz {
            let (ln, l) = body.next().ok_or_else(|| perr(sl, format!("expected {nnz} entries")))?;
            let mut tok = l.split_whitespace();
            let i: usize = num(tok.next(), ln, "row index")?;
            let j: usize = num(tok.next(), ln, "column index")?;
            let v: f64 = num(tok.next(), ln, "value")?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(perr(ln, format!("index ({i},{j}) outside {rows}x{cols}")));
            }
            t.push((i - 1, j - 1, v));
            if symmetric && i != j {
                t.push((j - 1, i - 1, v));
            }
        }
        Ok(MarketMatrix::Sparse(SparseMatrix::from_triplets(rows, cols, t)))
    } else {
        let mut d = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            let start = if symmetric { j } else { 0 };
            for i in start..rows {
                let (ln, l) = body.next().ok_or_else(|| perr(sl, "too few array entries"))?;
                let v: f64 = num(l.split_whitespace().next(), ln, "value")?;
                d[(i, j)] = v;
                if symmetric {
                    d[(j, i)] = v;
                }
            }
        }
        Ok(MarketMatrix::Dense(d))
    }
}

/// One value per line.
pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(26 * v.len());
    for x in v {
        out.push_str(&format!("{x:.17e}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| num(Some(l.trim()), k + 1, "value"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_coordinate_is_mirrored() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 2.0\n2 1 -1.0\n";
        let m = parse(text).unwrap().into_sparse();
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn array_is_column_major() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        let d = parse(text).unwrap().into_dense();
        assert_eq!(d, DenseMatrix::from_rows(&[vec![1.0, 3.0], vec![2.0, 4.0]]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n";
        match parse(text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("column index"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("hello"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_vector("1.0\nnope\n"), Err(Error::Parse { line: 2, .. })));
    }
}
