//! The dissimilarities OKM can be run with.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{kernel_distance_sq, squared_euclidean, KernelSpec};

pub const DEFAULT_IDIV_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dissimilarity {
    SquaredEuclidean,
    /// Generalized I-divergence `Σ x ln(x/y) − x + y`, both arguments
    /// clamped below at `epsilon` componentwise.
    IDivergence { epsilon: f64 },
    KernelInduced { kernel: KernelSpec },
}

impl Dissimilarity {
    pub fn idivergence() -> Self {
        Dissimilarity::IDivergence {
            epsilon: DEFAULT_IDIV_EPSILON,
        }
    }

    pub fn kernel(kernel: KernelSpec) -> Self {
        Dissimilarity::KernelInduced { kernel }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Dissimilarity::SquaredEuclidean => Ok(()),
            Dissimilarity::IDivergence { epsilon } => {
                if *epsilon > 0.0 && epsilon.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "I-divergence epsilon must be positive, got {epsilon}"
                    )))
                }
            }
            Dissimilarity::KernelInduced { kernel } => kernel.validate(),
        }
    }

    /// Whether the measure is only defined on the non-negative orthant.
    pub fn requires_non_negative(&self) -> bool {
        matches!(self, Dissimilarity::IDivergence { .. })
    }

    /// Dissimilarity of `y` from `x`. For the I-divergence, `x` is the data
    /// point and `y` the model (image or prototype).
    pub fn dissim(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        match *self {
            Dissimilarity::SquaredEuclidean => Ok(squared_euclidean(x, y)),
            Dissimilarity::IDivergence { epsilon } => idivergence(x, y, epsilon),
            Dissimilarity::KernelInduced { kernel } => kernel_distance_sq(kernel, x, y),
        }
    }
}

impl std::fmt::Display for Dissimilarity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dissimilarity::SquaredEuclidean => f.write_str("euclidean"),
            Dissimilarity::IDivergence { .. } => f.write_str("idiv"),
            Dissimilarity::KernelInduced { kernel } => write!(f, "kernel:{kernel}"),
        }
    }
}

pub fn dissim(d: &Dissimilarity, x: &[f64], y: &[f64]) -> Result<f64> {
    d.dissim(x, y)
}

pub(crate) fn check_non_negative(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| *v < 0.0) {
        Some(index) => Err(Error::NegativeInput {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

fn idivergence(x: &[f64], y: &[f64], epsilon: f64) -> Result<f64> {
    check_non_negative(x)?;
    check_non_negative(y)?;
    let total: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let a = a.max(epsilon);
            let b = b.max(epsilon);
            a * (a / b).ln() - a + b
        })
        .sum();
    // each term is >= 0 analytically; rounding can leave a few ulps below
    Ok(total.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn all_kinds() -> [Dissimilarity; 5] {
        [
            Dissimilarity::SquaredEuclidean,
            Dissimilarity::idivergence(),
            Dissimilarity::kernel(KernelSpec::Rbf { sigma: 1.5 }),
            Dissimilarity::kernel(KernelSpec::Polynomial { degree: 0.25 }),
            Dissimilarity::kernel(KernelSpec::Linear),
        ]
    }

    #[test]
    fn self_dissimilarity_is_zero() {
        for d in all_kinds() {
            assert_eq!(d.dissim(&[0.0, 2.5, 7.0], &[0.0, 2.5, 7.0]).unwrap(), 0.0, "{d}");
        }
    }

    #[test]
    fn euclidean_three_four_five() {
        let d = Dissimilarity::SquaredEuclidean.dissim(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_eq!(d, 25.0);
    }

    #[test]
    fn idivergence_by_hand() {
        let e = std::f64::consts::E;
        let d = Dissimilarity::idivergence().dissim(&[1.0], &[e]).unwrap();
        assert_abs_diff_eq!(d, e - 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d, 0.7182818284590451, epsilon = 1e-15);
    }

    #[test]
    fn idivergence_is_asymmetric() {
        let d = Dissimilarity::idivergence();
        let forward = d.dissim(&[1.0], &[2.0]).unwrap();
        let backward = d.dissim(&[2.0], &[1.0]).unwrap();
        // 1·ln(1/2) − 1 + 2 and 2·ln 2 − 2 + 1
        assert_abs_diff_eq!(forward, 1.0 - 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(backward, 2.0 * 2f64.ln() - 1.0, epsilon = 1e-15);
        assert!((forward - backward).abs() > 0.05);
    }

    #[test]
    fn idivergence_clamps_zeros() {
        let d = Dissimilarity::idivergence();
        assert_eq!(d.dissim(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), 0.0);
        let v = d.dissim(&[0.0], &[1.0]).unwrap();
        assert!(v.is_finite() && v > 0.99);
        let v = d.dissim(&[1.0], &[0.0]).unwrap();
        assert!(v.is_finite() && v > 20.0);
    }

    #[test]
    fn idivergence_rejects_negatives() {
        let d = Dissimilarity::idivergence();
        assert!(matches!(
            d.dissim(&[1.0, -0.5], &[1.0, 1.0]),
            Err(Error::NegativeInput { index: 1, .. })
        ));
        assert!(matches!(
            d.dissim(&[1.0], &[-1e-300]),
            Err(Error::NegativeInput { index: 0, .. })
        ));
        assert!(Dissimilarity::IDivergence { epsilon: 0.0 }.validate().is_err());
    }

    #[test]
    fn dimension_mismatch() {
        for d in all_kinds() {
            assert!(matches!(
                d.dissim(&[1.0, 2.0], &[1.0]),
                Err(Error::DimensionMismatch { .. })
            ));
        }
    }

    fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..8).prop_flat_map(|p| {
            (
                proptest::collection::vec(0.0f64..20.0, p),
                proptest::collection::vec(0.0f64..20.0, p),
            )
        })
    }

    proptest! {
        #[test]
        fn non_negative((x, y) in pair()) {
            for d in all_kinds() {
                prop_assert!(d.dissim(&x, &y).unwrap() >= 0.0);
            }
        }

        #[test]
        fn symmetric_kinds((x, y) in pair()) {
            for d in [
                Dissimilarity::SquaredEuclidean,
                Dissimilarity::kernel(KernelSpec::Rbf { sigma: 3.0 }),
                Dissimilarity::kernel(KernelSpec::Polynomial { degree: 2.0 }),
            ] {
                let a = d.dissim(&x, &y).unwrap();
                let b = d.dissim(&y, &x).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
            }
        }

        #[test]
        fn linear_kernel_equals_euclidean((x, y) in pair()) {
            let e = Dissimilarity::SquaredEuclidean.dissim(&x, &y).unwrap();
            let k = Dissimilarity::kernel(KernelSpec::Linear).dissim(&x, &y).unwrap();
            prop_assert!((e - k).abs() <= 1e-12);
        }
    }
}
