//! CUSUM baseline with boundary removal and its Gaussian multiplier bootstrap.
//!
//! `Z(s) = sqrt(s (n - s) / n) * (mean(X_1..X_s) - mean(X_{s+1}..X_n))` for
//! `s` in the scan range `[s_lo, n - s_lo]`; the statistic is the largest
//! sup-norm over that range. The bootstrap replaces each split's centred
//! left and right sums by multiplier-weighted versions, sharing one
//! multiplier vector across all splits of a replicate.
//!
//! Everything runs on prefix sums: O(n p) for the sequence and O(n p) per
//! bootstrap replicate.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bootstrap::{check_alpha, check_replicates, p_value, quantile, BootstrapDraws};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::rng;

/// Boundary removal used in the reference simulation setting.
pub const DEFAULT_BOUNDARY: usize = 40;

/// `Z(s)` for `s = start, ..., n - start`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CusumSequence {
    pub start: usize,
    pub p: usize,
    values: Vec<f64>,
}

impl CusumSequence {
    pub fn len(&self) -> usize {
        self.values.len() / self.p
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Z(s)`; `s` must lie in the scan range.
    pub fn at(&self, s: usize) -> &[f64] {
        let k = s - self.start;
        &self.values[k * self.p..(k + 1) * self.p]
    }

    pub fn splits(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.values
            .chunks_exact(self.p)
            .enumerate()
            .map(move |(k, z)| (self.start + k, z))
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CusumResult {
    pub statistic: f64,
    pub boundary: usize,
    pub quantile: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

fn check_boundary(n: usize, boundary: usize) -> Result<()> {
    if boundary == 0 || boundary > n / 2 {
        return Err(Error::invalid(format!(
            "boundary must lie in [1, {}] for n = {n}, got {boundary}",
            n / 2
        )));
    }
    Ok(())
}

/// Inclusive prefix sums: row `s` holds `sum_{i <= s} X_i` (1-based `s`),
/// row 0 is zero.
fn prefix_sums(data: &DataMatrix) -> Vec<f64> {
    let (n, p) = (data.nrows(), data.ncols());
    let mut out = vec![0.0; (n + 1) * p];
    for (i, row) in data.rows().enumerate() {
        let (prev, next) = out.split_at_mut((i + 1) * p);
        let prev = &prev[i * p..];
        for k in 0..p {
            next[k] = prev[k] + row[k];
        }
    }
    out
}

pub fn cusum_sequence(data: &DataMatrix, boundary: usize) -> Result<CusumSequence> {
    data.require_rows(2)?;
    let (n, p) = (data.nrows(), data.ncols());
    check_boundary(n, boundary)?;
    let prefix = prefix_sums(data);
    let total = &prefix[n * p..];
    let nf = n as f64;
    let mut values = Vec::with_capacity((n - 2 * boundary + 1) * p);
    for s in boundary..=n - boundary {
        let sf = s as f64;
        let w = (sf * (nf - sf) / nf).sqrt();
        let left = &prefix[s * p..(s + 1) * p];
        values.extend(
            left.iter()
                .zip(total)
                .map(|(l, t)| w * (l / sf - (t - l) / (nf - sf))),
        );
    }
    Ok(CusumSequence {
        start: boundary,
        p,
        values,
    })
}

pub fn cusum_statistic(data: &DataMatrix, boundary: usize) -> Result<f64> {
    Ok(cusum_sequence(data, boundary)?.sup())
}

/// `max_s |Z#(s)|_inf` for an explicit multiplier vector `e` (length `n`).
pub fn cusum_multiplier_statistic(data: &DataMatrix, boundary: usize, e: &[f64]) -> Result<f64> {
    data.require_rows(2)?;
    check_boundary(data.nrows(), boundary)?;
    if e.len() != data.nrows() {
        return Err(Error::DimensionMismatch {
            expected: data.nrows(),
            got: e.len(),
        });
    }
    let prefix = prefix_sums(data);
    let mut scratch = Scratch::new(data.ncols());
    Ok(multiplier_sup(data, &prefix, boundary, e, &mut scratch))
}

struct Scratch {
    ex_prefix: Vec<f64>,
    ex_total: Vec<f64>,
}

impl Scratch {
    fn new(p: usize) -> Self {
        Self {
            ex_prefix: vec![0.0; p],
            ex_total: vec![0.0; p],
        }
    }
}

/// Left term: `sum_{i<=s} e_i X_i - mean_left * sum_{i<=s} e_i`; the right term
/// is the same expression on `i > s`, recovered from the totals.
fn multiplier_sup(
    data: &DataMatrix,
    prefix: &[f64],
    boundary: usize,
    e: &[f64],
    scratch: &mut Scratch,
) -> f64 {
    let (n, p) = (data.nrows(), data.ncols());
    let nf = n as f64;
    let total_x = &prefix[n * p..];

    scratch.ex_total.iter_mut().for_each(|v| *v = 0.0);
    for (row, &ei) in data.rows().zip(e) {
        for (t, x) in scratch.ex_total.iter_mut().zip(row) {
            *t += ei * x;
        }
    }
    let e_total: f64 = e.iter().sum();

    scratch.ex_prefix.iter_mut().for_each(|v| *v = 0.0);
    let mut e_prefix = 0.0;
    let mut best: f64 = 0.0;
    for s in 1..=n - boundary {
        let ei = e[s - 1];
        e_prefix += ei;
        for (t, x) in scratch.ex_prefix.iter_mut().zip(data.row(s - 1)) {
            *t += ei * x;
        }
        if s < boundary {
            continue;
        }
        let sf = s as f64;
        let left_w = ((nf - sf) / (nf * sf)).sqrt();
        let right_w = (sf / (nf * (nf - sf))).sqrt();
        let x_left = &prefix[s * p..(s + 1) * p];
        for k in 0..p {
            let mean_left = x_left[k] / sf;
            let mean_right = (total_x[k] - x_left[k]) / (nf - sf);
            let left = scratch.ex_prefix[k] - mean_left * e_prefix;
            let right = (scratch.ex_total[k] - scratch.ex_prefix[k]) - mean_right * (e_total - e_prefix);
            best = best.max((left_w * left - right_w * right).abs());
        }
    }
    best
}

/// `B` bootstrap draws of the boundary-removed CUSUM sup statistic.
pub fn cusum_bootstrap_draws(
    data: &DataMatrix,
    boundary: usize,
    b: usize,
    seed: u64,
) -> Result<BootstrapDraws> {
    data.require_rows(2)?;
    check_boundary(data.nrows(), boundary)?;
    check_replicates(b)?;
    let n = data.nrows();
    let prefix = prefix_sums(data);
    let values = (0..b)
        .into_par_iter()
        .map_init(
            || (Scratch::new(data.ncols()), vec![0.0; n]),
            |(scratch, e), rep| {
                let mut rng = rng::stream(seed, &[rng::domain::CUSUM, rep as u64]);
                e.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                multiplier_sup(data, &prefix, boundary, e, scratch)
            },
        )
        .collect();
    Ok(BootstrapDraws::new(values, seed))
}

pub fn run_cusum_test(
    data: &DataMatrix,
    boundary: usize,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<CusumResult> {
    check_alpha(alpha)?;
    let start = Instant::now();
    let statistic = cusum_statistic(data, boundary)?;
    let draws = cusum_bootstrap_draws(data, boundary, b, seed)?;
    let quantile = quantile(&draws, 1.0 - alpha)?;
    Ok(CusumResult {
        statistic,
        boundary,
        quantile,
        p_value: p_value(&draws, statistic),
        alpha,
        reject: statistic > quantile,
        b,
        seed,
        n: data.nrows(),
        p: data.ncols(),
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}
