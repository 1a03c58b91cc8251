//! Experiment configuration files (TOML or JSON, flat keys).
//!
//! ```toml
//! preset = "desk"        # or "paper"
//! noise = "student_t"    # gaussian | student_t | contaminated_gaussian | cauchy
//! nu = 6.0
//! cov = "ar"             # identity | compound | ar
//! rho = 0.8
//! kernel = "sign"
//! B = 200
//! reps = 500
//! seed = 7
//! ```
//!
//! Resolution order, lowest to highest precedence: built-in defaults, preset,
//! file values, command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cusum::DEFAULT_BOUNDARY;
use crate::datagen::{first_coordinate_shift, CovarianceSpec, NoiseSpec, ScenarioConfig};
use crate::error::{Error, Result};
use crate::experiments::default_scenario_id;
use crate::kernel::KernelKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// n = 100, p = 20, B = 200, 500 repetitions.
    Desk,
    /// n = 500, p = 600, B = 200, 500 repetitions.
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    StudentT,
    ContaminatedGaussian,
    Cauchy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CovKind {
    Identity,
    Compound,
    Ar,
}

/// A shift given either as `theta_max` on the first coordinate or as a full
/// vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Theta {
    Max(f64),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<Preset>,
    pub scenario_id: Option<String>,
    pub noise: Option<NoiseKind>,
    pub nu: Option<f64>,
    pub eps: Option<f64>,
    pub cov: Option<CovKind>,
    pub load: Option<f64>,
    pub diag: Option<f64>,
    pub rho: Option<f64>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub m: Option<usize>,
    pub theta: Option<Theta>,
    #[serde(rename = "B")]
    pub b: Option<usize>,
    pub reps: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub kernel: Option<KernelKind>,
    pub boundary: Option<usize>,
    pub theta_grid: Option<Vec<f64>>,
    pub m_grid: Option<Vec<usize>>,
    pub out_dir: Option<PathBuf>,
}

/// Signal sizes used for power curves when the config gives none.
pub const DEFAULT_THETA_GRID: [f64; 8] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0];

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    /// Values set in `other` replace values in `self`.
    pub fn overlay(mut self, other: &ExperimentConfig) -> Self {
        overlay!(self, other;
            preset, scenario_id, noise, nu, eps, cov, load, diag, rho, n, p, m, theta,
            b, reps, alpha, seed, kernel, boundary, theta_grid, m_grid, out_dir);
        self
    }

    /// Fills unset fields from the preset (desk when none is named).
    pub fn resolved(&self) -> Self {
        let preset = self.preset.unwrap_or(Preset::Desk);
        let (n, p) = match preset {
            Preset::Desk => (100, 20),
            Preset::Paper => (500, 600),
        };
        let base = ExperimentConfig {
            preset: Some(preset),
            noise: Some(NoiseKind::Gaussian),
            cov: Some(CovKind::Identity),
            n: Some(n),
            p: Some(p),
            b: Some(200),
            reps: Some(500),
            alpha: Some(0.05),
            seed: Some(1),
            kernel: Some(KernelKind::Linear),
            boundary: Some(DEFAULT_BOUNDARY),
            ..Default::default()
        };
        base.overlay(self)
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        match self.noise.unwrap_or(NoiseKind::Gaussian) {
            NoiseKind::Gaussian => NoiseSpec::Gaussian,
            NoiseKind::Cauchy => NoiseSpec::Cauchy,
            NoiseKind::StudentT => NoiseSpec::StudentT {
                nu: self.nu.unwrap_or(NoiseSpec::DEFAULT_T_NU),
            },
            NoiseKind::ContaminatedGaussian => NoiseSpec::ContaminatedGaussian {
                eps: self.eps.unwrap_or(NoiseSpec::DEFAULT_CONTAMINATION_EPS),
                nu: self.nu.unwrap_or(NoiseSpec::DEFAULT_CONTAMINATION_NU),
            },
        }
    }

    pub fn cov_spec(&self) -> CovarianceSpec {
        match self.cov.unwrap_or(CovKind::Identity) {
            CovKind::Identity => CovarianceSpec::Identity,
            CovKind::Compound => CovarianceSpec::Compound {
                load: self.load.unwrap_or(0.8),
                diag: self.diag.unwrap_or(0.2),
            },
            CovKind::Ar => CovarianceSpec::Ar {
                rho: self.rho.unwrap_or(0.8),
            },
        }
    }

    fn theta_vector(&self, p: usize) -> Result<Vec<f64>> {
        match &self.theta {
            None => Ok(vec![0.0; p]),
            Some(Theta::Max(t)) => Ok(first_coordinate_shift(*t, p)),
            Some(Theta::Vector(v)) if v.len() == p => Ok(v.clone()),
            Some(Theta::Vector(v)) => Err(Error::Config(format!(
                "theta has {} entries but p = {p}",
                v.len()
            ))),
        }
    }

    /// The single scenario described by this config (after [`resolved`]).
    ///
    /// [`resolved`]: Self::resolved
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let r = self.resolved();
        let (n, p) = (r.n.unwrap_or(100), r.p.unwrap_or(20));
        let scenario = ScenarioConfig {
            noise: r.noise_spec(),
            cov: r.cov_spec(),
            n,
            p,
            m: r.m,
            theta: r.theta_vector(p)?,
            b: r.b.unwrap_or(200),
            reps: r.reps.unwrap_or(500),
            alpha: r.alpha.unwrap_or(0.05),
            seed: r.seed.unwrap_or(1),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// The null version of [`scenario`](Self::scenario), ignoring `m`/`theta`.
    pub fn null_scenario(&self) -> Result<ScenarioConfig> {
        let mut c = self.clone();
        c.m = None;
        c.theta = None;
        c.scenario()
    }

    /// One scenario per `(m, theta_max)`; `theta_max = 0` yields the null
    /// scenario so the size point sits on every curve.
    pub fn power_grid(&self) -> Result<Vec<ScenarioConfig>> {
        let base = self.null_scenario()?;
        let r = self.resolved();
        let thetas = r.theta_grid.clone().unwrap_or_else(|| DEFAULT_THETA_GRID.to_vec());
        let ms = r
            .m_grid
            .clone()
            .unwrap_or_else(|| default_m_grid(base.n));
        if thetas.is_empty() || ms.is_empty() {
            return Err(Error::Config("theta_grid and m_grid must be non-empty".into()));
        }
        let mut grid = Vec::with_capacity(thetas.len() * ms.len());
        for &m in &ms {
            for &t in &thetas {
                let c = if t == 0.0 {
                    base.clone()
                } else {
                    base.clone().with_shift(m, first_coordinate_shift(t, base.p))
                };
                c.validate()?;
                grid.push(c);
            }
        }
        Ok(grid)
    }

    pub fn kernel_kind(&self) -> KernelKind {
        self.kernel.unwrap_or(KernelKind::Linear)
    }

    pub fn boundary_value(&self) -> usize {
        self.boundary.unwrap_or(DEFAULT_BOUNDARY)
    }

    pub fn scenario_label(&self) -> Result<String> {
        match &self.scenario_id {
            Some(id) => Ok(id.clone()),
            None => Ok(default_scenario_id(&self.null_scenario()?)),
        }
    }
}

/// `n/10, 3n/10, n/2`, the relative locations of the reference power study.
pub fn default_m_grid(n: usize) -> Vec<usize> {
    let mut ms: Vec<usize> = [n / 10, 3 * n / 10, n / 2]
        .into_iter()
        .map(|m| m.clamp(1, n.saturating_sub(1).max(1)))
        .collect();
    ms.dedup();
    ms
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_flat_keys() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            noise = "student_t"
            cov = "compound"
            n = 50
            p = 4
            B = 99
            reps = 10
            seed = 3
            kernel = "sign"
            "#,
        )
        .unwrap();
        let s = c.scenario().unwrap();
        assert_eq!(s.noise, NoiseSpec::StudentT { nu: 6.0 });
        assert_eq!(s.cov, CovarianceSpec::Compound { load: 0.8, diag: 0.2 });
        assert_eq!((s.n, s.p, s.b, s.reps, s.seed), (50, 4, 99, 10, 3));
        assert!(s.is_null());
        assert_eq!(c.kernel_kind(), KernelKind::Sign);
    }

    #[test]
    fn json_and_theta_forms() {
        let c = ExperimentConfig::from_json_str(r#"{"n": 20, "p": 3, "m": 5, "theta": 1.5}"#).unwrap();
        assert_eq!(c.scenario().unwrap().theta, vec![1.5, 0.0, 0.0]);
        let c = ExperimentConfig::from_json_str(r#"{"n": 20, "p": 2, "m": 5, "theta": [0.5, -1]}"#)
            .unwrap();
        assert_eq!(c.scenario().unwrap().theta, vec![0.5, -1.0]);
        let c = ExperimentConfig::from_json_str(r#"{"n": 20, "p": 3, "m": 5, "theta": [1]}"#).unwrap();
        assert!(c.scenario().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn presets_and_overrides() {
        let paper = ExperimentConfig {
            preset: Some(Preset::Paper),
            ..Default::default()
        };
        let s = paper.scenario().unwrap();
        assert_eq!((s.n, s.p, s.b, s.reps), (500, 600, 200, 500));
        let cli = ExperimentConfig {
            reps: Some(7),
            ..Default::default()
        };
        let s = paper.overlay(&cli).scenario().unwrap();
        assert_eq!((s.n, s.reps), (500, 7));
        let desk = ExperimentConfig::default().scenario().unwrap();
        assert_eq!((desk.n, desk.p), (100, 20));
    }

    #[test]
    fn power_grid_layout() {
        let c = ExperimentConfig {
            theta_grid: Some(vec![0.0, 1.0]),
            ..Default::default()
        };
        let g = c.power_grid().unwrap();
        assert_eq!(g.len(), 6);
        assert!(g[0].is_null());
        assert_eq!(g[1].m, Some(10));
        assert_eq!(g[5].m, Some(50));
        assert_eq!(default_m_grid(500), vec![50, 150, 250]);
    }
}
