//! Monte Carlo size and power studies.
//!
//! Every repetition is an independent task: its dataset comes from the stream
//! `(seed, scenario, rep)` and its bootstrap multipliers from
//! `(seed, scenario, rep, method)`. Reports are assembled in repetition order,
//! so results do not depend on scheduling.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bootstrap::run_test;
use crate::cusum::run_cusum_test;
use crate::data::DataMatrix;
use crate::datagen::{cov_factor, ScenarioConfig};
use crate::error::{Error, Result};
use crate::kernel::KernelKind;
use crate::rng::{self, hash_label};

/// A calibrated test to run on each repetition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Jmb { kernel: KernelKind },
    Cusum { boundary: usize },
}

impl Method {
    fn tag(&self) -> u64 {
        match self {
            Method::Jmb { kernel: KernelKind::Linear } => 1,
            Method::Jmb { kernel: KernelKind::Sign } => 2,
            Method::Cusum { .. } => 3,
        }
    }

    /// Kernel column value in the summary CSV.
    pub fn kernel_label(&self) -> &'static str {
        match self {
            Method::Jmb { kernel } => kernel.as_str(),
            Method::Cusum { .. } => "cusum",
        }
    }

    fn test(&self, data: &DataMatrix, alpha: f64, b: usize, seed: u64) -> Result<(f64, bool)> {
        match *self {
            Method::Jmb { kernel } => {
                let r = run_test(data, &kernel, alpha, b, seed)?;
                Ok((r.p_value, r.reject))
            }
            Method::Cusum { boundary } => {
                let r = run_cusum_test(data, boundary, alpha, b, seed)?;
                Ok((r.p_value, r.reject))
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Jmb { kernel } => write!(f, "jmb-{kernel}"),
            Method::Cusum { boundary } => write!(f, "cusum-b{boundary}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeReport {
    pub scenario_id: String,
    pub method: Method,
    pub p_values: Vec<f64>,
    pub uniform_error_full: f64,
    pub uniform_error_01: f64,
    pub scenario: ScenarioConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl SizeReport {
    /// `R̂(alpha)`, the fraction of p-values at or below `alpha`.
    pub fn rejection_rate(&self, alpha: f64) -> f64 {
        rejection_rate(&self.p_values, alpha)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerPoint {
    pub theta_max: f64,
    pub m: Option<usize>,
    pub rejection_rate: f64,
    #[serde(rename = "R")]
    pub reps: usize,
}

impl PowerPoint {
    /// Binomial Monte Carlo standard error of the rejection rate.
    pub fn standard_error(&self) -> f64 {
        let r = self.rejection_rate;
        (r * (1.0 - r) / self.reps as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerReport {
    pub scenario_id: String,
    pub method: Method,
    pub alpha: f64,
    pub grid: Vec<PowerPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodComparison {
    pub jmb: SizeReport,
    pub cusum: SizeReport,
}

pub fn rejection_rate(p_values: &[f64], alpha: f64) -> f64 {
    p_values.iter().filter(|&&p| p <= alpha).count() as f64 / p_values.len() as f64
}

/// `sup |R̂(alpha) - alpha|` over `alpha in (0, upper)` (or `(0, upper]` when
/// `closed`), evaluated exactly from the jump points of the ECDF.
///
/// Between jumps the error is linear in `alpha`, so the supremum is reached
/// at a one-sided limit at a jump or at an endpoint of the interval.
pub fn sup_ecdf_error(p_values: &[f64], upper: f64, closed: bool) -> f64 {
    let r = p_values.len();
    if r == 0 {
        return 0.0;
    }
    let rf = r as f64;
    let mut sorted = p_values.to_vec();
    sorted.sort_by(f64::total_cmp);

    // alpha -> 0+
    let at_zero = sorted.iter().filter(|&&p| p <= 0.0).count() as f64 / rf;
    let mut best = at_zero;

    for (idx, &p) in sorted.iter().enumerate() {
        if p <= 0.0 || p > upper {
            continue;
        }
        let before = idx as f64 / rf;
        let after = (idx + 1) as f64 / rf;
        best = best.max((before - p).abs());
        if p < upper || closed {
            best = best.max((after - p).abs());
        }
    }

    // right endpoint: value at `upper` if closed, left limit otherwise
    let count = if closed {
        sorted.iter().filter(|&&p| p <= upper).count()
    } else {
        sorted.iter().filter(|&&p| p < upper).count()
    };
    best.max((count as f64 / rf - upper).abs())
}

/// `sup_{alpha in (0, 1)} |R̂(alpha) - alpha|`.
pub fn uniform_error_full(p_values: &[f64]) -> f64 {
    sup_ecdf_error(p_values, 1.0, false)
}

/// `sup_{alpha in (0, 0.1]} |R̂(alpha) - alpha|`.
pub fn uniform_error_01(p_values: &[f64]) -> f64 {
    sup_ecdf_error(p_values, 0.1, true)
}

/// Default identifier for a scenario: noise, covariance and shape.
pub fn default_scenario_id(config: &ScenarioConfig) -> String {
    let mut id = format!(
        "{}-{}-n{}-p{}",
        config.noise.label(),
        config.cov.label(),
        config.n,
        config.p
    );
    if let Some(m) = config.m {
        id.push_str(&format!("-m{m}-theta{}", config.theta_max()));
    }
    id
}

fn method_seed(config: &ScenarioConfig, scenario: u64, rep: usize, method: Method) -> u64 {
    rng::derive_seed(
        config.seed,
        &[rng::domain::METHOD, scenario, rep as u64, method.tag()],
    )
}

/// Runs `methods` on each of the `reps` datasets of `config`; the datasets are
/// shared across methods. Returns `(p_value, reject)` per method per rep.
fn simulate(
    config: &ScenarioConfig,
    scenario_id: &str,
    methods: &[Method],
) -> Result<Vec<Vec<(f64, bool)>>> {
    config.validate()?;
    let factor = cov_factor(&config.cov, config.p)?;
    let scenario = hash_label(scenario_id);
    (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let data = config.generate(&factor, scenario, rep)?;
            methods
                .iter()
                .map(|&m| m.test(&data, config.alpha, config.b, method_seed(config, scenario, rep, m)))
                .collect()
        })
        .collect()
}

fn size_report(
    config: &ScenarioConfig,
    scenario_id: &str,
    method: Method,
    p_values: Vec<f64>,
    runtime_ms: f64,
) -> SizeReport {
    SizeReport {
        scenario_id: scenario_id.to_string(),
        method,
        uniform_error_full: uniform_error_full(&p_values),
        uniform_error_01: uniform_error_01(&p_values),
        p_values,
        scenario: config.clone(),
        runtime_ms: Some(runtime_ms),
    }
}

fn require_null(config: &ScenarioConfig) -> Result<()> {
    if !config.is_null() {
        return Err(Error::InvalidScenario(
            "size experiments need a scenario without a shift".into(),
        ));
    }
    Ok(())
}

/// Null-hypothesis calibration study over `config.reps` datasets.
pub fn size_experiment(config: &ScenarioConfig, scenario_id: &str, method: Method) -> Result<SizeReport> {
    require_null(config)?;
    let start = Instant::now();
    let out = simulate(config, scenario_id, &[method])?;
    let p_values = out.into_iter().map(|v| v[0].0).collect();
    Ok(size_report(
        config,
        scenario_id,
        method,
        p_values,
        start.elapsed().as_secs_f64() * 1e3,
    ))
}

/// Rejection rates at `alpha` for each shifted scenario in `grid`. Each grid
/// point gets its own scenario id, hence independent data streams.
pub fn power_experiment(
    grid: &[ScenarioConfig],
    scenario_id: &str,
    method: Method,
) -> Result<PowerReport> {
    let first = grid
        .first()
        .ok_or_else(|| Error::invalid("power grid is empty"))?;
    let start = Instant::now();
    let mut points = Vec::with_capacity(grid.len());
    for config in grid {
        let point_id = format!("{scenario_id}/{}", default_scenario_id(config));
        let out = simulate(config, &point_id, &[method])?;
        let rejections = out.iter().filter(|v| v[0].1).count();
        points.push(PowerPoint {
            theta_max: config.theta_max(),
            m: config.m,
            rejection_rate: rejections as f64 / config.reps as f64,
            reps: config.reps,
        });
    }
    Ok(PowerReport {
        scenario_id: scenario_id.to_string(),
        method,
        alpha: first.alpha,
        grid: points,
        runtime_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Linear-kernel JMB against boundary-removed CUSUM on the same datasets, with
/// independent multiplier streams per method.
pub fn method_comparison(
    config: &ScenarioConfig,
    scenario_id: &str,
    boundary: usize,
) -> Result<MethodComparison> {
    require_null(config)?;
    let methods = [
        Method::Jmb { kernel: KernelKind::Linear },
        Method::Cusum { boundary },
    ];
    let start = Instant::now();
    let out = simulate(config, scenario_id, &methods)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let column = |k: usize| out.iter().map(|v| v[k].0).collect::<Vec<_>>();
    Ok(MethodComparison {
        jmb: size_report(config, scenario_id, methods[0], column(0), elapsed),
        cusum: size_report(config, scenario_id, methods[1], column(1), elapsed),
    })
}

/// Drops runtime fields so reports compare equal across runs.
pub trait StripTiming {
    fn strip_timing(&mut self);
}

impl StripTiming for SizeReport {
    fn strip_timing(&mut self) {
        self.runtime_ms = None;
    }
}

impl StripTiming for PowerReport {
    fn strip_timing(&mut self) {
        self.runtime_ms = None;
    }
}

impl StripTiming for MethodComparison {
    fn strip_timing(&mut self) {
        self.jmb.strip_timing();
        self.cusum.strip_timing();
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Per-repetition p-values: `scenario_id,rep,p_value`.
pub fn write_pvalues_csv(reports: &[&SizeReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["scenario_id", "rep", "p_value"])?;
    for r in reports {
        let id = report_label(r, reports.len() > 1);
        for (rep, p) in r.p_values.iter().enumerate() {
            w.write_record([id.clone(), rep.to_string(), fmt_f64(*p)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn report_label(r: &SizeReport, qualify: bool) -> String {
    if qualify {
        format!("{}:{}", r.scenario_id, r.method)
    } else {
        r.scenario_id.clone()
    }
}

/// One summary row per report.
pub fn write_summary_csv(reports: &[&SizeReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "scenario_id",
        "n",
        "p",
        "kernel",
        "distribution",
        "cov",
        "uniform_error_full",
        "uniform_error_01",
        "runtime_ms",
    ])?;
    for r in reports {
        w.write_record([
            report_label(r, reports.len() > 1),
            r.scenario.n.to_string(),
            r.scenario.p.to_string(),
            r.method.kernel_label().to_string(),
            r.scenario.noise.label().to_string(),
            r.scenario.cov.label().to_string(),
            fmt_f64(r.uniform_error_full),
            fmt_f64(r.uniform_error_01),
            r.runtime_ms.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `theta_max,m,rejection_rate,R`.
pub fn write_power_csv(report: &PowerReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["theta_max", "m", "rejection_rate", "R"])?;
    for pt in &report.grid {
        w.write_record([
            fmt_f64(pt.theta_max),
            pt.m.map(|m| m.to_string()).unwrap_or_default(),
            fmt_f64(pt.rejection_rate),
            pt.reps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{first_coordinate_shift, CovarianceSpec, NoiseSpec};

    fn dense_grid_error(p: &[f64], upper: f64, points: usize) -> f64 {
        (1..=points)
            .map(|k| upper * k as f64 / points as f64)
            .filter(|&a| a < 1.0)
            .map(|a| (rejection_rate(p, a) - a).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_point_ecdf() {
        assert!((uniform_error_full(&[0.25, 0.75]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn all_ones_reaches_one() {
        assert_eq!(uniform_error_full(&[1.0]), 1.0);
        assert_eq!(uniform_error_full(&[1.0, 1.0, 1.0]), 1.0);
    }

    #[test]
    fn restricted_interval() {
        // one p-value at 0.05: error 0.95 just after it
        assert!((uniform_error_01(&[0.05]) - 0.95).abs() < 1e-15);
        // nothing below 0.1: error is 0.1 at alpha = 0.1
        assert!((uniform_error_01(&[0.5, 0.9]) - 0.1).abs() < 1e-15);
        // a p-value exactly at 0.1 counts at the closed endpoint
        assert!((uniform_error_01(&[0.1, 0.9]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn restricted_never_exceeds_full() {
        let mut r = rng::stream(1, &[]);
        for _ in 0..50 {
            let len = 1 + (rand::Rng::random::<u32>(&mut r) % 40) as usize;
            let p: Vec<f64> = (0..len).map(|_| rand::Rng::random::<f64>(&mut r)).collect();
            assert!(uniform_error_01(&p) <= uniform_error_full(&p));
        }
    }

    #[test]
    fn matches_dense_grid() {
        let mut r = rng::stream(2, &[]);
        for _ in 0..5 {
            let p: Vec<f64> = (0..37).map(|_| rand::Rng::random::<f64>(&mut r).powi(2)).collect();
            let tol = 1.0 / 37.0 + 1e-6;
            assert!((uniform_error_full(&p) - dense_grid_error(&p, 1.0, 100_000)).abs() <= tol);
            assert!((uniform_error_01(&p) - dense_grid_error(&p, 0.1, 100_000)).abs() <= tol);
        }
    }

    fn small_null() -> ScenarioConfig {
        let mut c = ScenarioConfig::null(NoiseSpec::Gaussian, CovarianceSpec::Identity, 30, 4);
        c.b = 50;
        c.reps = 20;
        c.seed = 5;
        c
    }

    #[test]
    fn size_requires_null() {
        let c = small_null().with_shift(10, first_coordinate_shift(1.0, 4));
        let err = size_experiment(&c, "x", Method::Jmb { kernel: KernelKind::Linear }).unwrap_err();
        assert!(matches!(err, Error::InvalidScenario(_)));
        assert!(matches!(method_comparison(&c, "x", 5), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn size_is_reproducible() {
        let c = small_null();
        let m = Method::Jmb { kernel: KernelKind::Sign };
        let mut a = size_experiment(&c, "s", m).unwrap();
        let mut b = size_experiment(&c, "s", m).unwrap();
        a.strip_timing();
        b.strip_timing();
        assert_eq!(a, b);
        assert_eq!(a.p_values.len(), 20);
        assert!(a.uniform_error_01 <= a.uniform_error_full);
        assert!(a.p_values.iter().all(|&p| p > 0.0 && p <= 1.0));
    }

    #[test]
    fn comparison_shares_data() {
        let c = small_null();
        let cmp = method_comparison(&c, "cmp", 5).unwrap();
        assert_eq!(cmp.jmb.p_values.len(), cmp.cusum.p_values.len());
        // the JMB half matches a stand-alone run on the same scenario id
        let mut solo = size_experiment(&c, "cmp", Method::Jmb { kernel: KernelKind::Linear }).unwrap();
        let mut jmb = cmp.jmb.clone();
        solo.strip_timing();
        jmb.strip_timing();
        assert_eq!(solo.p_values, jmb.p_values);
    }

    #[test]
    fn power_saturates_for_huge_shift() {
        let base = small_null();
        let grid: Vec<_> = [0.0, 20.0]
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    base.clone()
                } else {
                    base.clone().with_shift(15, first_coordinate_shift(t, 4))
                }
            })
            .collect();
        let r = power_experiment(&grid, "pw", Method::Jmb { kernel: KernelKind::Linear }).unwrap();
        assert_eq!(r.grid.len(), 2);
        assert_eq!(r.grid[1].rejection_rate, 1.0);
        assert!(r.grid.iter().all(|p| (0.0..=1.0).contains(&p.rejection_rate)));
    }

    #[test]
    fn writes_reports() {
        let dir = tempfile::tempdir().unwrap();
        let c = small_null();
        let r = size_experiment(&c, "w", Method::Jmb { kernel: KernelKind::Linear }).unwrap();
        let pv = dir.path().join("p.csv");
        let sm = dir.path().join("s.csv");
        write_pvalues_csv(&[&r], &pv).unwrap();
        write_summary_csv(&[&r], &sm).unwrap();
        write_json(&r, &dir.path().join("r.json")).unwrap();
        let text = std::fs::read_to_string(&pv).unwrap();
        assert!(text.starts_with("scenario_id,rep,p_value\n"));
        assert_eq!(text.lines().count(), 21);
        let text = std::fs::read_to_string(&sm).unwrap();
        assert!(text.lines().next().unwrap().ends_with("uniform_error_full,uniform_error_01,runtime_ms"));
    }
}
