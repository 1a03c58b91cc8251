use crate::error::{Error, Result};

/// An `n x p` matrix of observations, one row per time point.
///
/// Storage is row-major. Every entry is finite; constructors reject NaN and
/// infinities.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    p: usize,
}

impl DataMatrix {
    /// Builds a matrix from row-major `values` with `n` rows and `p` columns.
    pub fn from_vec(values: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if p == 0 {
            return Err(Error::invalid("dimension p must be at least 1"));
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: values.len(),
            });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: idx / p,
                col: idx % p,
            });
        }
        Ok(Self { values, n, p })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n * p);
        for row in rows {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_vec(values, n, p)
    }

    /// A single-column matrix from a scalar series.
    pub fn from_series(series: &[f64]) -> Result<Self> {
        Self::from_vec(series.to_vec(), series.len(), 1)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.p {
            values.extend(self.rows().map(|r| r[j]));
        }
        Self {
            values,
            n: self.p,
            p: self.n,
        }
    }

    /// Rows in reverse time order.
    pub fn reversed(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for i in (0..self.n).rev() {
            values.extend_from_slice(self.row(i));
        }
        Self { values, ..*self }
    }

    pub(crate) fn require_rows(&self, needed: usize) -> Result<()> {
        if self.n < needed {
            return Err(Error::InsufficientData {
                needed,
                got: self.n,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = DataMatrix::from_vec(vec![1.0, f64::NAN, 3.0, 4.0], 2, 2).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 1 }));
        let err = DataMatrix::from_vec(vec![1.0, 2.0, 3.0, f64::INFINITY], 2, 2).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, col: 1 }));
    }

    #[test]
    fn ragged_rows() {
        let err = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn transpose_and_reverse() {
        let m = DataMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let t = m.transpose();
        assert_eq!((t.nrows(), t.ncols()), (2, 3));
        assert_eq!(t.row(0), &[1.0, 3.0, 5.0]);
        assert_eq!(m.reversed().row(0), &[5.0, 6.0]);
    }

    #[test]
    fn empty_is_rejected() {
        let rows: Vec<Vec<f64>> = vec![];
        assert!(matches!(
            DataMatrix::from_rows(&rows),
            Err(Error::InsufficientData { .. })
        ));
    }
}
