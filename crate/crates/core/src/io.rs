//! Matrix Market array files for `A` and plain-text vectors for `y`.
//!
//! Matrices use the dense array format, real general, values in column-major
//! order:
//!
//! ```text
//! %%MatrixMarket matrix array real general
//! % optional comments
//! 3 2
//! 1
//! 0
//! 0
//! 1
//! 1
//! 0
//! ```
//!
//! Vectors hold one decimal value per line; blank lines and lines starting
//! with `%` or `#` are ignored. Values are written with Rust's shortest
//! round-trip formatting so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const MM_HEADER: &str = "%%MatrixMarket matrix array real general";

fn parse_f64(tok: &str, what: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} value {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite {what} value {tok:?}")));
    }
    Ok(v)
}

pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    if fields.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(Error::Parse("missing %%MatrixMarket header".into()));
    }
    if fields[1..] != ["matrix", "array", "real", "general"] {
        return Err(Error::Parse(format!(
            "unsupported header {header:?}; expected {MM_HEADER:?}"
        )));
    }

    let mut tokens = lines
        .filter(|l| !l.trim_start().starts_with('%'))
        .flat_map(str::split_whitespace);
    let mut dim = |name: &str| -> Result<usize> {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {name} count")))?;
        tok.parse()
            .map_err(|_| Error::Parse(format!("bad {name} count {tok:?}")))
    };
    let rows = dim("row")?;
    let cols = dim("column")?;
    let expected = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Parse("matrix size overflows".into()))?;
    let data = tokens
        .map(|t| parse_f64(t, "matrix"))
        .collect::<Result<Vec<_>>>()?;
    if data.len() != expected {
        return Err(Error::Parse(format!(
            "{rows}x{cols} matrix needs {expected} values, found {}",
            data.len()
        )));
    }
    DenseMatrix::from_col_major(rows, cols, data).map_err(|e| Error::Parse(e.to_string()))
}

pub fn format_matrix_market(a: &DenseMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{MM_HEADER}").unwrap();
    writeln!(out, "{} {}", a.rows(), a.cols()).unwrap();
    for v in a.as_col_major() {
        writeln!(out, "{v:?}").unwrap();
    }
    out
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let values = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%') && !l.starts_with('#'))
        .map(|l| parse_f64(l, "vector"))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Parse("empty vector file".into()));
    }
    Ok(values)
}

pub fn format_vector(v: &[f64]) -> String {
    v.iter().fold(String::new(), |mut out, x| {
        writeln!(out, "{x:?}").unwrap();
        out
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_matrix_market(path: &Path) -> Result<DenseMatrix> {
    parse_matrix_market(&read(path)?)
}

pub fn write_matrix_market(path: &Path, a: &DenseMatrix) -> Result<()> {
    write(path, &format_matrix_market(a))
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&read(path)?)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    write(path, &format_vector(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_example() {
        let text = "%%MatrixMarket matrix array real general\n% fixture\n3 2\n1\n0\n0\n1\n1\n0\n";
        let a = parse_matrix_market(text).unwrap();
        assert_eq!(
            a,
            DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]).unwrap()
        );
    }

    #[test]
    fn rejects_bad_matrix_files() {
        for bad in [
            "",
            "3 2\n1\n",
            "%%MatrixMarket matrix coordinate real general\n3 2 1\n1 1 1.0\n",
            "%%MatrixMarket matrix array complex general\n1 1\n1 0\n",
            "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n",
            "%%MatrixMarket matrix array real general\n1 2\n1\nnan\n",
            "%%MatrixMarket matrix array real general\n1 1\nx\n",
            "%%MatrixMarket matrix array real general\n0 0\n",
        ] {
            assert!(
                matches!(parse_matrix_market(bad), Err(Error::Parse(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn vector_parsing() {
        assert_eq!(
            parse_vector("# y\n1\n\n-1\n0.5e1\n").unwrap(),
            vec![1.0, -1.0, 5.0]
        );
        assert!(parse_vector("\n").is_err());
        assert!(parse_vector("1\ninf\n").is_err());
    }

    proptest! {
        #[test]
        fn matrix_text_round_trip(
            rows in 1usize..6,
            cols in 1usize..5,
            seed in prop::collection::vec(-1e6f64..1e6, 30),
        ) {
            let data: Vec<f64> = seed.iter().cycle().take(rows * cols).map(|v| v / 7.0).collect();
            let a = DenseMatrix::from_col_major(rows, cols, data).unwrap();
            prop_assert_eq!(parse_matrix_market(&format_matrix_market(&a)).unwrap(), a);
        }

        #[test]
        fn vector_text_round_trip(v in prop::collection::vec(prop::num::f64::NORMAL, 1..20)) {
            prop_assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
        }
    }
}
