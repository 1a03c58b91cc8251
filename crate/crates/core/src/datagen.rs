//! Synthetic data from the location-shift model
//! `X_i = theta * 1(i > m) + xi_i`, with `xi_i = L z_i` style noise.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Spatial covariance structure `V` of the noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceSpec {
    /// `V = I`.
    Identity,
    /// `V = load * J + diag * I`.
    Compound { load: f64, diag: f64 },
    /// `V_ij = rho^|i - j|`.
    Ar { rho: f64 },
}

impl CovarianceSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CovarianceSpec::Identity => Ok(()),
            CovarianceSpec::Compound { load, diag } => {
                if !(load >= 0.0 && diag > 0.0 && load.is_finite() && diag.is_finite()) {
                    return Err(Error::invalid(format!(
                        "compound covariance needs load >= 0 and diag > 0, got load={load}, diag={diag}"
                    )));
                }
                Ok(())
            }
            CovarianceSpec::Ar { rho } => {
                if rho.is_nan() || rho.abs() >= 1.0 {
                    return Err(Error::invalid(format!("AR covariance needs |rho| < 1, got {rho}")));
                }
                Ok(())
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CovarianceSpec::Identity => "identity",
            CovarianceSpec::Compound { .. } => "compound",
            CovarianceSpec::Ar { .. } => "ar",
        }
    }

    /// The `p x p` matrix `V`.
    pub fn matrix(&self, p: usize) -> DMatrix<f64> {
        match *self {
            CovarianceSpec::Identity => DMatrix::identity(p, p),
            CovarianceSpec::Compound { load, diag } => {
                DMatrix::from_fn(p, p, |i, j| if i == j { load + diag } else { load })
            }
            CovarianceSpec::Ar { rho } => {
                DMatrix::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32))
            }
        }
    }
}

/// Noise family of `xi_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Gaussian,
    /// Elliptical multivariate t: `L z sqrt(nu / w)`, `w ~ chi2(nu)`.
    StudentT { nu: f64 },
    /// `(1 - eps) N(0, V) + eps N(0, nu^2 V)`.
    ContaminatedGaussian { eps: f64, nu: f64 },
    /// `L eta` with i.i.d. standard Cauchy components.
    Cauchy,
}

impl NoiseSpec {
    pub const DEFAULT_T_NU: f64 = 6.0;
    pub const DEFAULT_CONTAMINATION_EPS: f64 = 0.2;
    pub const DEFAULT_CONTAMINATION_NU: f64 = 2.0;

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::StudentT { nu } if !(nu > 2.0 && nu.is_finite()) => {
                Err(Error::invalid(format!("t noise needs nu > 2, got {nu}")))
            }
            NoiseSpec::ContaminatedGaussian { eps, nu } if !(eps > 0.0 && eps < 1.0) || !(nu > 0.0 && nu.is_finite()) => {
                Err(Error::invalid(format!(
                    "contaminated Gaussian needs eps in (0, 1) and nu > 0, got eps={eps}, nu={nu}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NoiseSpec::Gaussian => "gaussian",
            NoiseSpec::StudentT { .. } => "student_t",
            NoiseSpec::ContaminatedGaussian { .. } => "contaminated_gaussian",
            NoiseSpec::Cauchy => "cauchy",
        }
    }
}

/// Lower-triangular `L` with `L L^T = V`. `None` stands for the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct CovFactor {
    lower: Option<DMatrix<f64>>,
    p: usize,
}

impl CovFactor {
    pub fn identity(p: usize) -> Self {
        Self { lower: None, p }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_identity(&self) -> bool {
        self.lower.is_none()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        self.lower
            .clone()
            .unwrap_or_else(|| DMatrix::identity(self.p, self.p))
    }

    /// `out = L z`.
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        match &self.lower {
            None => out.copy_from_slice(z),
            Some(l) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (j, zj) in z.iter().enumerate().take(i + 1) {
                        acc += l[(i, j)] * zj;
                    }
                    *o = acc;
                }
            }
        }
    }
}

pub fn cov_factor(spec: &CovarianceSpec, p: usize) -> Result<CovFactor> {
    spec.validate()?;
    if p == 0 {
        return Err(Error::invalid("dimension p must be at least 1"));
    }
    if matches!(spec, CovarianceSpec::Identity) {
        return Ok(CovFactor::identity(p));
    }
    let chol = spec
        .matrix(p)
        .cholesky()
        .ok_or_else(|| Error::Factorization(format!("{spec:?} is not positive definite at p = {p}")))?;
    Ok(CovFactor {
        lower: Some(chol.l()),
        p,
    })
}

#[inline]
fn standard_cauchy(rng: &mut StreamRng) -> f64 {
    let u: f64 = rng.random();
    (std::f64::consts::PI * (u - 0.5)).tan()
}

/// `n` noise vectors drawn from `noise` with covariance factor `factor`.
pub fn sample_noise(
    noise: &NoiseSpec,
    factor: &CovFactor,
    n: usize,
    rng: &mut StreamRng,
) -> Result<DataMatrix> {
    noise.validate()?;
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let p = factor.p();
    let chi2 = match *noise {
        NoiseSpec::StudentT { nu } => {
            Some(ChiSquared::new(nu).map_err(|e| Error::invalid(e.to_string()))?)
        }
        _ => None,
    };
    let mut values = vec![0.0; n * p];
    let mut z = vec![0.0; p];
    for out in values.chunks_exact_mut(p) {
        match *noise {
            NoiseSpec::Cauchy => z.iter_mut().for_each(|v| *v = standard_cauchy(rng)),
            _ => z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
        }
        factor.apply(&z, out);
        let scale = match *noise {
            NoiseSpec::Gaussian | NoiseSpec::Cauchy => 1.0,
            NoiseSpec::StudentT { nu } => {
                let w = chi2.as_ref().map_or(nu, |c| c.sample(rng));
                (nu / w).sqrt()
            }
            NoiseSpec::ContaminatedGaussian { eps, nu } => {
                if rng.random::<f64>() < eps {
                    nu
                } else {
                    1.0
                }
            }
        };
        if scale != 1.0 {
            out.iter_mut().for_each(|v| *v *= scale);
        }
    }
    DataMatrix::from_vec(values, n, p)
}

/// Adds `theta` to every row after position `m` (1-based: rows `m+1..n`).
pub fn apply_shift(noise: DataMatrix, m: Option<usize>, theta: &[f64]) -> Result<DataMatrix> {
    let (n, p) = (noise.nrows(), noise.ncols());
    let Some(m) = m else {
        return Ok(noise);
    };
    if m == 0 || m >= n {
        return Err(Error::invalid(format!("change location m must lie in [1, {}], got {m}", n - 1)));
    }
    if theta.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: theta.len(),
        });
    }
    let mut values = noise.into_vec();
    for row in values.chunks_exact_mut(p).skip(m) {
        for (x, t) in row.iter_mut().zip(theta) {
            *x += t;
        }
    }
    DataMatrix::from_vec(values, n, p)
}

/// `theta = (theta_max, 0, ..., 0)`.
pub fn first_coordinate_shift(theta_max: f64, p: usize) -> Vec<f64> {
    let mut theta = vec![0.0; p];
    if p > 0 {
        theta[0] = theta_max;
    }
    theta
}

/// One Monte Carlo scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub noise: NoiseSpec,
    pub cov: CovarianceSpec,
    pub n: usize,
    pub p: usize,
    pub m: Option<usize>,
    pub theta: Vec<f64>,
    #[serde(rename = "B")]
    pub b: usize,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn null(noise: NoiseSpec, cov: CovarianceSpec, n: usize, p: usize) -> Self {
        Self {
            noise,
            cov,
            n,
            p,
            m: None,
            theta: vec![0.0; p],
            b: 200,
            reps: 500,
            alpha: 0.05,
            seed: 0,
        }
    }

    pub fn with_shift(mut self, m: usize, theta: Vec<f64>) -> Self {
        self.m = Some(m);
        self.theta = theta;
        self
    }

    pub fn is_null(&self) -> bool {
        self.m.is_none()
    }

    pub fn theta_max(&self) -> f64 {
        self.theta.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        self.cov.validate()?;
        if self.n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: self.n });
        }
        if self.p == 0 {
            return Err(Error::invalid("dimension p must be at least 1"));
        }
        if self.theta.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: self.theta.len(),
            });
        }
        let zero_theta = self.theta.iter().all(|&t| t == 0.0);
        match self.m {
            None if !zero_theta => {
                return Err(Error::InvalidScenario(
                    "non-zero theta requires a change location m".into(),
                ))
            }
            Some(_) if zero_theta => {
                return Err(Error::InvalidScenario(
                    "a change location m requires a non-zero theta".into(),
                ))
            }
            Some(m) if m == 0 || m >= self.n => {
                return Err(Error::InvalidScenario(format!(
                    "change location m must lie in [1, {}], got {m}",
                    self.n - 1
                )))
            }
            _ => {}
        }
        if self.theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("theta must be finite"));
        }
        crate::bootstrap::check_alpha(self.alpha)?;
        crate::bootstrap::check_replicates(self.b)?;
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        Ok(())
    }

    /// The dataset for repetition `rep`; a pure function of
    /// `(seed, scenario, rep)`.
    pub fn generate(&self, factor: &CovFactor, scenario: u64, rep: usize) -> Result<DataMatrix> {
        let mut rng = rng::stream(self.seed, &[rng::domain::NOISE, scenario, rep as u64]);
        let noise = sample_noise(&self.noise, factor, self.n, &mut rng)?;
        apply_shift(noise, self.m, &self.theta)
    }
}
