//! Robust, tuning-free bootstrap test for a change in the location of
//! high-dimensional independent observations.
//!
//! The test statistic is the sup-norm of a scaled U-statistic built from an
//! anti-symmetric kernel (`x - y` or `sign(x - y)`), calibrated by a
//! half-jackknife Gaussian multiplier bootstrap. A boundary-removed CUSUM test
//! is included as a baseline, along with a Monte Carlo harness for size and
//! power studies.
//!
//! ```
//! use ucpt::{run_test, DataMatrix, KernelKind};
//!
//! let mut rows = vec![vec![0.0, 0.0]; 40];
//! for (i, r) in rows.iter_mut().enumerate() {
//!     r[0] = (i as f64 * 0.37).sin();
//!     r[1] = (i as f64 * 1.3).cos();
//!     if i >= 20 {
//!         r[0] += 4.0;
//!     }
//! }
//! let data = DataMatrix::from_rows(&rows).unwrap();
//! let result = run_test(&data, &KernelKind::Sign, 0.05, 500, 42).unwrap();
//! assert!(result.reject);
//! ```

pub mod bootstrap;
pub mod config;
pub mod cusum;
pub mod data;
pub mod datagen;
pub mod error;
pub mod experiments;
pub mod io;
pub mod kernel;
pub mod rng;
pub mod teststat;

pub use bootstrap::{gamma_hat, jmb_draws, p_value, quantile, run_test, BootstrapDraws, GammaHat, TestResult};
pub use cusum::{cusum_bootstrap_draws, cusum_sequence, run_cusum_test, CusumResult};
pub use data::DataMatrix;
pub use datagen::{CovarianceSpec, NoiseSpec, ScenarioConfig};
pub use error::{Error, Result};
pub use kernel::{Kernel, KernelKind};
pub use teststat::{half_rows, half_rows_linear_fast, statistic_from_rows, HalfRows, StatisticValue};
