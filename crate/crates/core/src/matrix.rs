//! Dense observation-major panel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n x p` panel of finite observations stored row-major.
///
/// Rows index observations (time, replicate) and columns index dimensions
/// (assets, coordinates). Construction validates the shape and rejects
/// NaN/Inf, so every `DataMatrix` in circulation satisfies its invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct DataMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl TryFrom<RawMatrix> for DataMatrix {
    type Error = Error;
    fn try_from(raw: RawMatrix) -> Result<Self> {
        DataMatrix::new(raw.n_rows, raw.n_cols, raw.values)
    }
}

impl From<DataMatrix> for RawMatrix {
    fn from(m: DataMatrix) -> Self {
        RawMatrix {
            n_rows: m.n_rows,
            n_cols: m.n_cols,
            values: m.values,
        }
    }
}

/// Checks shape and finiteness, returning the validated matrix.
pub fn validate_matrix(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<DataMatrix> {
    if n_rows < 2 || n_cols < 1 {
        return Err(Error::TooSmall {
            rows: n_rows,
            cols: n_cols,
        });
    }
    if values.len() != n_rows * n_cols {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a {n_rows}x{n_cols} matrix",
            values.len()
        )));
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / n_cols,
            col: pos % n_cols,
        });
    }
    Ok(DataMatrix { n_rows, n_cols, values })
}

impl DataMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        validate_matrix(n_rows, n_cols, values)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        validate_matrix(n_rows, n_cols, values)
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns<C: AsRef<[f64]>>(cols: &[C]) -> Result<Self> {
        let n_cols = cols.len();
        let n_rows = cols.first().map_or(0, |c| c.as_ref().len());
        if cols.iter().any(|c| c.as_ref().len() != n_rows) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        let mut values = vec![0.0; n_rows * n_cols];
        for (j, c) in cols.iter().enumerate() {
            for (i, &v) in c.as_ref().iter().enumerate() {
                values[i * n_cols + j] = v;
            }
        }
        validate_matrix(n_rows, n_cols, values)
    }

    /// Applies `f(i, j, value)` entrywise; the result is re-validated.
    pub fn map_indexed<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, f64) -> f64,
    {
        let p = self.n_cols;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k / p, k % p, v))
            .collect();
        validate_matrix(self.n_rows, self.n_cols, values)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&j| j >= self.n_cols) {
            return Err(Error::DimensionMismatch(format!(
                "column {bad} out of range for {} columns",
                self.n_cols
            )));
        }
        let mut values = Vec::with_capacity(self.n_rows * cols.len());
        for r in self.rows() {
            values.extend(cols.iter().map(|&j| r[j]));
        }
        validate_matrix(self.n_rows, cols.len(), values)
    }

    /// Keeps rows `start..end`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "row range {start}..{end} out of bounds for {} rows",
                self.n_rows
            )));
        }
        validate_matrix(
            end - start,
            self.n_cols,
            self.values[start * self.n_cols..end * self.n_cols].to_vec(),
        )
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.map_indexed(|_, _, v| v * c)
    }
}
