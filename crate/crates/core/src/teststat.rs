//! The pairwise U-statistic and its half-jackknife row sums.
//!
//! For observations `X_1, ..., X_n` the row sums are
//! `A_i = sum_{j > i} h(X_i, X_j)`. Summing them gives the full pairwise sum,
//! so the statistic
//!
//! ```text
//! T_n = sqrt(n) * (2 / (n (n - 1))) * sum_i A_i,     T̄_n = |T_n|_inf
//! ```
//!
//! and the multiplier bootstrap both work from the same `n x d` table.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::Result;
use crate::kernel::{Kernel, KernelKind};

/// Row sums `A_i = sum_{j > i} h(X_i, X_j)`, stored row-major as `n x d`.
/// The last row is always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfRows {
    rows: Vec<f64>,
    n: usize,
    d: usize,
}

impl HalfRows {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rows
    }

    /// `sqrt(n) / C(n, 2)`, the scale shared by `T_n` and its bootstrap copy.
    pub fn scale(&self) -> f64 {
        let n = self.n as f64;
        n.sqrt() * 2.0 / (n * (n - 1.0))
    }
}

/// `T_n` together with its sup-norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatisticValue {
    pub t_vector: Vec<f64>,
    pub t_max: f64,
    pub n: usize,
    pub d: usize,
}

/// Generic O(n^2 d) evaluation of the row sums for any kernel.
///
/// Rows are filled in parallel; each row is accumulated sequentially in `j`
/// so the output does not depend on the number of worker threads.
pub fn half_rows(kernel: &dyn Kernel, data: &DataMatrix) -> Result<HalfRows> {
    data.require_rows(2)?;
    let n = data.nrows();
    let d = kernel.output_dim(data.ncols());
    let mut rows = vec![0.0; n * d];
    rows.par_chunks_mut(d)
        .enumerate()
        .for_each_init(
            || vec![0.0; d],
            |buf, (i, acc)| {
                let xi = data.row(i);
                for j in i + 1..n {
                    kernel.eval_into(xi, data.row(j), buf);
                    for (a, h) in acc.iter_mut().zip(buf.iter()) {
                        *a += h;
                    }
                }
            },
        );
    Ok(HalfRows { rows, n, d })
}

/// O(n p) row sums for the linear kernel:
/// `A_i = (n - i) X_i - sum_{j > i} X_j`, using a right-to-left suffix sum.
pub fn half_rows_linear_fast(data: &DataMatrix) -> Result<HalfRows> {
    data.require_rows(2)?;
    let n = data.nrows();
    let p = data.ncols();
    let mut rows = vec![0.0; n * p];
    let mut suffix = vec![0.0; p];
    for i in (0..n).rev() {
        let count = (n - 1 - i) as f64;
        let xi = data.row(i);
        let out = &mut rows[i * p..(i + 1) * p];
        for k in 0..p {
            out[k] = count * xi[k] - suffix[k];
            suffix[k] += xi[k];
        }
    }
    Ok(HalfRows { rows, n, d: p })
}

/// Row sums through the fastest available path for `kernel`.
pub fn half_rows_auto(kernel: &dyn Kernel, data: &DataMatrix) -> Result<HalfRows> {
    match kernel.builtin() {
        Some(KernelKind::Linear) => half_rows_linear_fast(data),
        _ => half_rows(kernel, data),
    }
}

pub fn statistic_from_rows(rows: &HalfRows) -> StatisticValue {
    let mut t_vector = vec![0.0; rows.d];
    for i in 0..rows.n {
        for (t, a) in t_vector.iter_mut().zip(rows.row(i)) {
            *t += a;
        }
    }
    let scale = rows.scale();
    t_vector.iter_mut().for_each(|t| *t *= scale);
    let t_max = sup_norm(&t_vector);
    StatisticValue {
        t_vector,
        t_max,
        n: rows.n,
        d: rows.d,
    }
}

/// Convenience: row sums followed by the statistic.
pub fn statistic(kernel: &dyn Kernel, data: &DataMatrix) -> Result<StatisticValue> {
    Ok(statistic_from_rows(&half_rows_auto(kernel, data)?))
}

/// Sup-norm difference between the brute-force pairwise sum
/// `sum_{i<j} (X_i - X_j)` and the single-pass weighted form
/// `sum_i (n - 2i + 1) X_i` (1-based `i`). Test helper for the linear kernel.
pub fn cross_weight_identity_check(data: &DataMatrix) -> Result<f64> {
    data.require_rows(2)?;
    let n = data.nrows();
    let p = data.ncols();
    let mut pairwise = vec![0.0; p];
    for i in 0..n {
        for j in i + 1..n {
            for (k, s) in pairwise.iter_mut().enumerate() {
                *s += data.get(i, k) - data.get(j, k);
            }
        }
    }
    let mut weighted = vec![0.0; p];
    for (i, row) in data.rows().enumerate() {
        let w = n as f64 - 2.0 * (i as f64 + 1.0) + 1.0;
        for (s, x) in weighted.iter_mut().zip(row) {
            *s += w * x;
        }
    }
    Ok(pairwise
        .iter()
        .zip(&weighted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[inline]
pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}
