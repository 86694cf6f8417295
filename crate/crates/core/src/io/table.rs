use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shortest round-trip decimal in scientific notation (`1e-14`, `-2.5e0`).
pub fn format_real(x: f64) -> String {
    format!("{x:e}")
}

/// `re+imj` with both parts as in [`format_real`].
pub fn format_complex<T: Real>(z: Complex<T>) -> String {
    let (re, im) = (z.re.to_f64_lossy(), z.im.to_f64_lossy());
    if im.is_sign_negative() && !im.is_nan() {
        format!("{}-{}j", format_real(re), format_real(-im))
    } else {
        format!("{}+{}j", format_real(re), format_real(im))
    }
}

/// Inverse of [`format_complex`].
pub fn parse_complex(s: &str) -> Result<Complex<f64>> {
    let bad = || Error::Parse {
        line: 0,
        column: 0,
        message: format!("not a complex number: {s:?}"),
    };
    let body = s.strip_suffix('j').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    // the separating sign is the last one not preceded by an exponent marker
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(Complex::new(re, im))
}

/// A header plus string rows, written as RFC 4180 CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_reals(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&x| format_real(x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        self.write_records(&mut w)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
        self.write_records(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn write_records<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record(&self.header).map_err(csv_error)?;
        for r in &self.rows {
            if r.len() != self.header.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row has {} fields, header has {}",
                    r.len(),
                    self.header.len()
                )));
            }
            w.write_record(r).map_err(csv_error)?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
        let header = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(String::from).collect()).map_err(csv_error))
            .collect::<Result<_>>()?;
        Ok(Self { header, rows })
    }

    /// Column `name` parsed as reals.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("no column \"{name}\"")))?;
        self.rows
            .iter()
            .map(|r| {
                r[j].parse::<f64>().map_err(|_| Error::Parse {
                    line: 0,
                    column: j,
                    message: format!("not a number: {:?}", r[j]),
                })
            })
            .collect()
    }
}

fn csv_error(e: csv::Error) -> Error {
    let pos = e.position().map(|p| (p.line() as usize, 0));
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        other => {
            let (line, column) = pos.unwrap_or((0, 0));
            Error::Parse {
                line,
                column,
                message: format!("{other:?}"),
            }
        }
    }
}

/// Empirical CDF of `errors`: columns `error, empirical_cdf`, sorted.
pub fn cdf_table(errors: &[f64]) -> CsvTable {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut t = CsvTable::new(&["error", "empirical_cdf"]);
    for (i, e) in sorted.into_iter().enumerate() {
        t.push_reals(&[e, (i + 1) as f64 / n as f64]);
    }
    t
}
