//! Tabular datasets and their CSV representation.
//!
//! The CSV shape is fixed: a header `x0,...,x{n-1},y`, one sample per row,
//! decimal floats, and `#`-prefixed comment lines.

use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major inputs with one target per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_vars: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(n_vars: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::InvalidSpec("dataset needs at least one input".into()));
        }
        if x.len() != y.len() * n_vars {
            return Err(Error::DimensionMismatch {
                what: "dataset inputs",
                expected: y.len() * n_vars,
                got: x.len(),
            });
        }
        Ok(Self { n_vars, x, y })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let n_vars = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_vars) {
            return Err(Error::DimensionMismatch {
                what: "dataset row",
                expected: n_vars,
                got: rows[bad].len(),
            });
        }
        Self::new(n_vars, rows.concat(), y)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_vars..(i + 1) * self.n_vars]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.n_vars)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn with_targets(&self, y: Vec<f64>) -> Result<Self> {
        Self::new(self.n_vars, self.x.clone(), y)
    }

    pub fn slice(&self, range: Range<usize>) -> Self {
        Self {
            n_vars: self.n_vars,
            x: self.x[range.start * self.n_vars..range.end * self.n_vars].to_vec(),
            y: self.y[range].to_vec(),
        }
    }

    /// Per-column `(min, max)` of the inputs.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.n_vars)
            .map(|c| {
                self.rows().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[c]), hi.max(r[c]))
                })
            })
            .collect()
    }

    /// Splits off the last `fraction` of rows (at least one when possible).
    /// Returns `(head, tail)`.
    pub fn split_tail(&self, fraction: f64) -> (Self, Self) {
        let n = self.len();
        let tail = if n >= 2 {
            ((n as f64 * fraction).floor() as usize).clamp(1, n - 1)
        } else {
            0
        };
        (self.slice(0..n - tail), self.slice(n - tail..n))
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .has_headers(true)
            .from_reader(reader);
        let header = rdr.headers().map_err(csv_error)?.clone();
        let cols = header.len();
        if cols < 2 {
            return Err(Error::Data {
                line: 1,
                msg: "header needs at least one input column and `y`".into(),
            });
        }
        for (i, name) in header.iter().enumerate() {
            let expected = if i + 1 == cols {
                "y".to_string()
            } else {
                format!("x{i}")
            };
            if name != expected {
                return Err(Error::Data {
                    line: 1,
                    msg: format!("column {i} is `{name}`, expected `{expected}`"),
                });
            }
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != cols {
                return Err(Error::Data {
                    line,
                    msg: format!("expected {cols} fields, found {}", record.len()),
                });
            }
            for (i, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Data {
                    line,
                    msg: format!("field {i} is not a number: `{field}`"),
                })?;
                if i + 1 == cols {
                    y.push(v);
                } else {
                    x.push(v);
                }
            }
        }
        if y.is_empty() {
            return Err(Error::Data {
                line: 1,
                msg: "no data rows".into(),
            });
        }
        Self::new(cols - 1, x, y)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Writes the CSV form; floats use the shortest round-trip representation.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.n_vars).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        wtr.write_record(&header).map_err(csv_error)?;
        for (row, y) in self.rows().zip(&self.y) {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            rec.push(format!("{y:?}"));
            wtr.write_record(&rec).map_err(csv_error)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Data {
            line,
            msg: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Data {
            line,
            msg: e.to_string(),
        },
    }
}

/// Train/validation/test partition used by the fitting pipeline: the last
/// 20% of rows are held out for testing, and the last 20% of the remainder
/// for validation.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

pub const HOLDOUT_FRACTION: f64 = 0.2;

impl Split {
    pub fn new(data: &Dataset) -> Self {
        let (rest, test) = data.split_tail(HOLDOUT_FRACTION);
        let (train, val) = rest.split_tail(HOLDOUT_FRACTION);
        Self { train, val, test }
    }
}
