//! Kernel functions and Gram matrices.

use serde::Serialize;

use crate::dataio::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// A positive-semidefinite (or, for fractional polynomial degrees, merely
/// symmetric) similarity function on input vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `exp(-‖x − y‖² / σ²)`
    Rbf { sigma: f64 },
    /// `(⟨x, y⟩ + 1)^d`
    Polynomial { degree: f64 },
    /// `⟨x, y⟩`
    Linear,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidSpec(format!("RBF sigma must be positive and finite, got {sigma}")),
            ),
            KernelSpec::Polynomial { degree } if !(degree > 0.0 && degree.is_finite()) => {
                Err(Error::InvalidSpec(format!(
                    "polynomial degree must be positive and finite, got {degree}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// True when every Gram matrix of this kernel is guaranteed PSD.
    pub fn is_mercer(&self) -> bool {
        match *self {
            KernelSpec::Polynomial { degree } => degree.fract() == 0.0,
            _ => true,
        }
    }
}

impl std::fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelSpec::Rbf { sigma } => write!(f, "rbf(sigma={sigma})"),
            KernelSpec::Polynomial { degree } => write!(f, "poly(d={degree})"),
            KernelSpec::Linear => write!(f, "linear"),
        }
    }
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn squared_euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

fn eval_unchecked(spec: KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    match spec {
        KernelSpec::Rbf { sigma } => Ok((-squared_euclidean(x, y) / (sigma * sigma)).exp()),
        KernelSpec::Polynomial { degree } => {
            let base = dot(x, y) + 1.0;
            if base < 0.0 && degree.fract() != 0.0 {
                return Err(Error::DomainError { base, degree });
            }
            Ok(base.powf(degree))
        }
        KernelSpec::Linear => Ok(dot(x, y)),
    }
}

pub fn kernel_eval(spec: KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_dims(x, y)?;
    eval_unchecked(spec, x, y)
}

/// Squared feature-space distance `K(x,x) + K(y,y) − 2K(x,y)`, clamped at 0.
///
/// The clamp matters for fractional polynomial degrees, where the kernel is
/// not PSD and the raw expression can dip slightly below zero.
pub fn kernel_distance_sq(spec: KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_dims(x, y)?;
    let raw = match spec {
        // K(x,x) = K(y,y) = 1 exactly
        KernelSpec::Rbf { .. } => 2.0 - 2.0 * eval_unchecked(spec, x, y)?,
        // Expanding ⟨x,x⟩ + ⟨y,y⟩ − 2⟨x,y⟩ loses precision; use the difference directly.
        KernelSpec::Linear => squared_euclidean(x, y),
        KernelSpec::Polynomial { .. } => {
            eval_unchecked(spec, x, x)? + eval_unchecked(spec, y, y)?
                - 2.0 * eval_unchecked(spec, x, y)?
        }
    };
    Ok(raw.max(0.0))
}

/// Kernel matrix over the rows of a dataset.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub spec: KernelSpec,
    pub matrix: SymMatrix,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }
}

pub fn gram(spec: KernelSpec, data: &DataMatrix) -> Result<GramMatrix> {
    spec.validate()?;
    if data.n() == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let matrix = SymMatrix::try_from_upper(data.n(), |i, j| {
        eval_unchecked(spec, data.row(i), data.row(j))
    })?;
    Ok(GramMatrix { spec, matrix })
}
