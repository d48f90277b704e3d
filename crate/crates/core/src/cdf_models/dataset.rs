use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// `n` paired observations: covariate rows in R^d and scalar responses.
///
/// Covariates are stored row-major. A dataset is never mutated after
/// construction; resampling produces new datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    d: usize,
}

impl Dataset {
    /// Builds a dataset from row-major covariates with `d` columns.
    pub fn new(x: Vec<f64>, d: usize, y: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Data("covariate dimension must be >= 1".into()));
        }
        if y.is_empty() {
            return Err(Error::Data("dataset needs at least one observation".into()));
        }
        if x.len() != y.len() * d {
            return Err(Error::Data(format!(
                "covariate matrix has {} entries, expected {} rows x {} columns",
                x.len(),
                y.len(),
                d
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite covariate in row {}", i / d + 1)));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite response in row {}", i + 1)));
        }
        Ok(Self { x, y, d })
    }

    /// One covariate column.
    pub fn univariate(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::new(x, 1, y)
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Data("ragged covariate rows".into()));
        }
        Self::new(rows.concat(), d, y)
    }

    pub(crate) fn from_parts_unchecked(x: Vec<f64>, d: usize, y: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), y.len() * d);
        Self { x, y, d }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Rows at `idx`, in order, repeats allowed.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut x = Vec::with_capacity(idx.len() * self.d);
        let mut y = Vec::with_capacity(idx.len());
        for &i in idx {
            x.extend_from_slice(self.x(i));
            y.push(self.y[i]);
        }
        Self::from_parts_unchecked(x, self.d, y)
    }

    /// The dataset with one extra observation appended.
    pub fn with_point(&self, x: &[f64], y: f64) -> Result<Self> {
        if x.len() != self.d {
            return Err(Error::Data(format!("point has {} coordinates, expected {}", x.len(), self.d)));
        }
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("appended point must be finite".into()));
        }
        let mut xs = self.x.clone();
        xs.extend_from_slice(x);
        let mut ys = self.y.clone();
        ys.push(y);
        Ok(Self::from_parts_unchecked(xs, self.d, ys))
    }

    /// The dataset with row `i` removed.
    pub fn without(&self, i: usize) -> Result<Self> {
        if self.n() < 2 {
            return Err(Error::Data("cannot delete the only observation".into()));
        }
        let idx: Vec<usize> = (0..self.n()).filter(|&j| j != i).collect();
        Ok(self.select(&idx))
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.y
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Largest per-coordinate range of the covariates.
    pub fn x_spread(&self) -> f64 {
        (0..self.d)
            .map(|s| {
                let (lo, hi) = (0..self.n())
                    .map(|i| self.x(i)[s])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// Reads the CSV layout: a header row, columns `x1..xd` then `y`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let cols = headers.len();
        if cols < 2 {
            return Err(Error::Data("dataset CSV needs at least one covariate column and a response".into()));
        }
        if headers.get(cols - 1) != Some("y") {
            return Err(Error::Data(format!("last CSV column must be `y`, found {:?}", headers.get(cols - 1))));
        }
        let d = cols - 1;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Data(format!("row {}: cannot parse {field:?} as a number", line + 2)))?;
                if !v.is_finite() {
                    return Err(Error::Data(format!("row {}: non-finite value {field:?}", line + 2)));
                }
                if j < d {
                    x.push(v);
                } else {
                    y.push(v);
                }
            }
        }
        Self::new(x, d, y)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.d).map(|j| format!("x{j}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut rec: Vec<String> = self.x(i).iter().map(|v| format!("{v:?}")).collect();
            rec.push(format!("{:?}", self.y[i]));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
