use std::io::BufRead;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: 0,
        message: message.into(),
    }
}

/// Reads a real (or integer) Matrix Market matrix in `coordinate` or
/// `array` format, `general` or `symmetric`.
pub fn read_matrix_market<T: Real>(reader: impl BufRead) -> Result<Matrix<T>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let banner = banner?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "expected a %%MatrixMarket matrix banner"));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return Err(parse_err(1, format!("unsupported format {f}"))),
    };
    if !matches!(fields[3].as_str(), "real" | "integer" | "double") {
        return Err(Error::Schema(format!("only real matrices are supported, found {}", fields[3])));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        s => return Err(Error::Schema(format!("unsupported symmetry {s}"))),
    };

    let mut data = lines.filter_map(|(n, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        Ok(s) => Some(Ok((n, s))),
        Err(e) => Some(Err(Error::from(e))),
    });
    let (n0, size) = data.next().ok_or_else(|| parse_err(2, "missing size line"))??;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(n0, format!("bad size field {t:?}"))))
        .collect::<Result<_>>()?;
    let (rows, cols) = match (coordinate, dims.as_slice()) {
        (true, [r, c, _]) | (false, [r, c]) => (*r, *c),
        _ => return Err(parse_err(n0, "malformed size line")),
    };
    if symmetric && rows != cols {
        return Err(Error::Schema("symmetric matrix must be square".into()));
    }
    let mut m = Matrix::zeros(rows, cols);
    let value = |n: usize, t: &str| -> Result<T> {
        let x: f64 = t.parse().map_err(|_| parse_err(n, format!("bad value {t:?}")))?;
        if !x.is_finite() {
            return Err(Error::Schema(format!("line {n}: non-finite entry")));
        }
        Ok(T::of(x))
    };
    if coordinate {
        let nnz = dims[2];
        for _ in 0..nnz {
            let (n, l) = data.next().ok_or_else(|| parse_err(0, "fewer entries than declared"))??;
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 3 {
                return Err(parse_err(n, "expected `row col value`"));
            }
            let idx = |s: &str, max: usize| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(i) if (1..=max).contains(&i) => Ok(i - 1),
                    _ => Err(parse_err(n, format!("index {s:?} out of range"))),
                }
            };
            let (i, j) = (idx(t[0], rows)?, idx(t[1], cols)?);
            let v = Complex::new(value(n, t[2])?, T::zero());
            m[(i, j)] = v;
            if symmetric {
                m[(j, i)] = v;
            }
        }
    } else {
        // column-major, lower triangle only when symmetric
        for j in 0..cols {
            let start = if symmetric { j } else { 0 };
            for i in start..rows {
                let (n, l) = data.next().ok_or_else(|| parse_err(0, "fewer entries than declared"))??;
                let v = Complex::new(value(n, l.trim())?, T::zero());
                m[(i, j)] = v;
                if symmetric {
                    m[(j, i)] = v;
                }
            }
        }
    }
    if let Some(extra) = data.next() {
        let (n, _) = extra?;
        return Err(parse_err(n, "more entries than declared"));
    }
    Ok(m)
}
