//! Anti-symmetric pairwise kernels.
//!
//! A kernel maps a pair of observations `(x, y)` to a vector `h(x, y)` with
//! `h(x, y) = -h(y, x)`. Anti-symmetry is what makes the within-sample noise
//! cancel in the pairwise sum; shift-invariance (`h(x + c, y + c) = h(x, y)`)
//! is needed for the statistic to respond only to location changes.
//!
//! Both properties are part of the [`Kernel`] contract but are not checked
//! for user-supplied implementations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Kernel: Send + Sync {
    /// Output dimension `d` for inputs of dimension `p`.
    fn output_dim(&self, p: usize) -> usize;

    /// Writes `h(x, y)` into `out`. Callers guarantee `x.len() == y.len()`
    /// and `out.len() == self.output_dim(x.len())`.
    fn eval_into(&self, x: &[f64], y: &[f64], out: &mut [f64]);

    fn name(&self) -> &str;

    /// Identifies built-in kernels so callers can pick specialised paths.
    fn builtin(&self) -> Option<KernelKind> {
        None
    }
}

/// The two built-in kernels.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `h(x, y) = x - y`.
    Linear,
    /// `h(x, y) = sign(x - y)` componentwise, with `sign(0) = 0`.
    Sign,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Sign => "sign",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelKind::Linear),
            "sign" => Ok(KernelKind::Sign),
            other => Err(Error::invalid(format!("unknown kernel '{other}'"))),
        }
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Kernel for KernelKind {
    fn output_dim(&self, p: usize) -> usize {
        p
    }

    #[inline]
    fn eval_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        match self {
            KernelKind::Linear => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = a - b;
                }
            }
            KernelKind::Sign => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = sign(a - b);
                }
            }
        }
    }

    fn name(&self) -> &str {
        self.as_str()
    }

    fn builtin(&self) -> Option<KernelKind> {
        Some(*self)
    }
}

/// Evaluates `h(x, y)`, checking that the inputs have matching dimension.
pub fn apply(kernel: &dyn Kernel, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::invalid("kernel inputs must have dimension >= 1"));
    }
    let mut out = vec![0.0; kernel.output_dim(x.len())];
    kernel.eval_into(x, y, &mut out);
    Ok(out)
}
