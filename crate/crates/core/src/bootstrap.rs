//! Half-jackknife Gaussian multiplier bootstrap.
//!
//! Each replicate draws `e_1, ..., e_n ~ N(0, 1)` and forms
//! `T# = sqrt(n) / C(n, 2) * sum_i e_i A_i`. Conditionally on the data, `T#` is
//! exactly Gaussian with covariance `4 Γ̂`, where
//! `Γ̂ = (n (n - 1)^2)^{-1} sum_i A_i A_i^T`.
//!
//! Replicate `b` draws its multipliers from a stream keyed by `(seed, b)`, so
//! serial and parallel runs agree bit for bit.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::rng::{self, StreamRng};
use crate::teststat::{half_rows_auto, statistic_from_rows, sup_norm, HalfRows, StatisticValue};

/// Full `Γ̂` is only formed up to this output dimension unless asked otherwise.
pub const DEFAULT_FULL_GAMMA_MAX_DIM: usize = 256;

/// Bootstrap realizations of a sup-norm statistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BootstrapDraws {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl BootstrapDraws {
    pub fn new(values: Vec<f64>, seed: u64) -> Self {
        Self { values, seed }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestResult {
    pub statistic: StatisticValue,
    pub quantile: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub b: usize,
    pub seed: u64,
    pub kernel: String,
    pub n: usize,
    pub p: usize,
    pub elapsed_ms: Option<f64>,
}

/// Flat JSON view of a [`TestResult`].
#[derive(Serialize)]
struct TestResultRecord<'a> {
    statistic: f64,
    quantile: f64,
    p_value: f64,
    alpha: f64,
    reject: bool,
    #[serde(rename = "B")]
    b: usize,
    seed: u64,
    kernel: &'a str,
    n: usize,
    p: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

impl Serialize for TestResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TestResultRecord {
            statistic: self.statistic.t_max,
            quantile: self.quantile,
            p_value: self.p_value,
            alpha: self.alpha,
            reject: self.reject,
            b: self.b,
            seed: self.seed,
            kernel: &self.kernel,
            n: self.n,
            p: self.p,
            elapsed_ms: self.elapsed_ms,
        }
        .serialize(s)
    }
}

/// Diagonal (and optionally the full matrix, row-major) of `Γ̂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaHat {
    pub diag: Vec<f64>,
    pub full: Option<Vec<f64>>,
    pub d: usize,
}

impl GammaHat {
    /// Entry `(j, k)` of the full matrix, if it was formed.
    pub fn get(&self, j: usize, k: usize) -> Option<f64> {
        self.full.as_ref().map(|m| m[j * self.d + k])
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

pub(crate) fn check_replicates(b: usize) -> Result<()> {
    if b == 0 {
        return Err(Error::invalid("bootstrap replicate count must be at least 1"));
    }
    Ok(())
}

/// `T#` for a given multiplier vector `e` (length `n`).
pub fn jmb_vector_with_multipliers(rows: &HalfRows, e: &[f64]) -> Result<Vec<f64>> {
    if e.len() != rows.n() {
        return Err(Error::DimensionMismatch {
            expected: rows.n(),
            got: e.len(),
        });
    }
    let mut out = vec![0.0; rows.d()];
    accumulate(rows, e.iter().copied(), &mut out);
    Ok(out)
}

#[inline]
fn accumulate(rows: &HalfRows, e: impl Iterator<Item = f64>, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (i, ei) in e.enumerate() {
        for (o, a) in out.iter_mut().zip(rows.row(i)) {
            *o += ei * a;
        }
    }
    let scale = rows.scale();
    out.iter_mut().for_each(|v| *v *= scale);
}

fn replicate_rng(seed: u64, b: usize) -> StreamRng {
    rng::stream(seed, &[rng::domain::JMB, b as u64])
}

fn replicate_vector(rows: &HalfRows, seed: u64, b: usize, out: &mut [f64]) {
    let mut rng = replicate_rng(seed, b);
    let e = (0..rows.n()).map(|_| rng.sample::<f64, _>(StandardNormal));
    accumulate(rows, e, out);
}

/// `B` draws of `|T#|_inf`.
pub fn jmb_draws(rows: &HalfRows, b: usize, seed: u64) -> Result<BootstrapDraws> {
    check_replicates(b)?;
    let values = (0..b)
        .into_par_iter()
        .map_init(
            || vec![0.0; rows.d()],
            |buf, rep| {
                replicate_vector(rows, seed, rep, buf);
                sup_norm(buf)
            },
        )
        .collect();
    Ok(BootstrapDraws::new(values, seed))
}

/// `B` full `T#` vectors, row-major `B x d`. Same streams as [`jmb_draws`],
/// so `sup_norm` of row `b` equals draw `b`.
pub fn jmb_vectors(rows: &HalfRows, b: usize, seed: u64) -> Result<Vec<f64>> {
    check_replicates(b)?;
    let d = rows.d();
    let mut out = vec![0.0; b * d];
    out.par_chunks_mut(d)
        .enumerate()
        .for_each(|(rep, buf)| replicate_vector(rows, seed, rep, buf));
    Ok(out)
}

/// Smallest draw `t` with `ECDF(t) >= level`, i.e. the `ceil(B * level)`-th
/// order statistic.
pub fn quantile(draws: &BootstrapDraws, level: f64) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::invalid("quantile of an empty draw set"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0, 1), got {level}")));
    }
    let mut sorted = draws.values.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[order_index(sorted.len(), level)])
}

/// Zero-based index of the `ceil(len * level)`-th order statistic. The
/// product is nudged down by a few ulps so that e.g. `100 * 0.07` selects the
/// 7th value rather than the 8th.
fn order_index(len: usize, level: f64) -> usize {
    let target = len as f64 * level;
    let k = (target - target * 4.0 * f64::EPSILON).ceil() as usize;
    k.clamp(1, len) - 1
}

/// Add-one p-value `(1 + #{draw >= observed}) / (B + 1)`.
pub fn p_value(draws: &BootstrapDraws, observed: f64) -> f64 {
    let exceed = draws.values.iter().filter(|&&v| v >= observed).count();
    (1 + exceed) as f64 / (draws.len() + 1) as f64
}

/// The complete test: statistic, bootstrap calibration and decision.
/// Rejects when `T̄_n` is strictly above the `1 - alpha` bootstrap quantile.
pub fn run_test(
    data: &DataMatrix,
    kernel: &dyn Kernel,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    check_replicates(b)?;
    let start = Instant::now();
    let rows = half_rows_auto(kernel, data)?;
    let statistic = statistic_from_rows(&rows);
    let draws = jmb_draws(&rows, b, seed)?;
    let quantile = quantile(&draws, 1.0 - alpha)?;
    let p_value = p_value(&draws, statistic.t_max);
    let reject = statistic.t_max > quantile;
    Ok(TestResult {
        quantile,
        p_value,
        alpha,
        reject,
        b,
        seed,
        kernel: kernel.name().to_string(),
        n: data.nrows(),
        p: data.ncols(),
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
        statistic,
    })
}

/// `Γ̂` with the full matrix formed when `d <= DEFAULT_FULL_GAMMA_MAX_DIM`.
pub fn gamma_hat(rows: &HalfRows) -> GammaHat {
    gamma_hat_with_limit(rows, DEFAULT_FULL_GAMMA_MAX_DIM)
}

pub fn gamma_hat_with_limit(rows: &HalfRows, max_full_dim: usize) -> GammaHat {
    let n = rows.n() as f64;
    let d = rows.d();
    let norm = 1.0 / (n * (n - 1.0) * (n - 1.0));
    let mut diag = vec![0.0; d];
    let mut full = (d <= max_full_dim).then(|| vec![0.0; d * d]);
    for i in 0..rows.n() {
        let a = rows.row(i);
        for (g, v) in diag.iter_mut().zip(a) {
            *g += v * v;
        }
        if let Some(m) = full.as_mut() {
            for j in 0..d {
                for k in 0..d {
                    m[j * d + k] += a[j] * a[k];
                }
            }
        }
    }
    diag.iter_mut().for_each(|g| *g *= norm);
    if let Some(m) = full.as_mut() {
        m.iter_mut().for_each(|g| *g *= norm);
    }
    GammaHat { diag, full, d }
}
