//! Estimating the number of clusters from a Gram-matrix spectrum.
//!
//! When the data fall into well-separated groups the kernel matrix is close
//! to block diagonal, and the number of dominant eigenvalues matches the
//! number of blocks. Two mechanical readings of "dominant" are offered.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::GramMatrix;
use crate::linalg::{sorted_eigenvalues, SymMatrix};

pub const DEFAULT_TAU: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Count eigenvalues with `λ_i ≥ τ·λ_1`.
    RatioThreshold,
    /// Position of the largest drop `λ_i − λ_{i+1}`.
    LargestEigengap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignificancePolicy {
    pub kind: PolicyKind,
    pub tau: f64,
    /// Upper bound on the reported count; `None` means `n`.
    pub max_k: Option<usize>,
}

impl Default for SignificancePolicy {
    fn default() -> Self {
        Self::eigengap()
    }
}

impl SignificancePolicy {
    pub fn eigengap() -> Self {
        Self {
            kind: PolicyKind::LargestEigengap,
            tau: DEFAULT_TAU,
            max_k: None,
        }
    }

    pub fn ratio(tau: f64) -> Self {
        Self {
            kind: PolicyKind::RatioThreshold,
            tau,
            max_k: None,
        }
    }

    pub fn with_max_k(mut self, max_k: usize) -> Self {
        self.max_k = Some(max_k);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == PolicyKind::RatioThreshold && !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "ratio threshold tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if self.max_k == Some(0) {
            return Err(Error::InvalidSpec("max_k must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub estimated_k: usize,
    pub policy: SignificancePolicy,
}

/// Applies `policy` to an already sorted (descending) spectrum.
pub fn estimate_k_from_spectrum(eigenvalues: &[f64], policy: SignificancePolicy) -> Result<usize> {
    policy.validate()?;
    let n = eigenvalues.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let cap = policy.max_k.unwrap_or(n).min(n);
    let k = match policy.kind {
        PolicyKind::RatioThreshold => {
            let cutoff = policy.tau * eigenvalues[0];
            eigenvalues
                .iter()
                .filter(|&&l| l > 0.0 && l >= cutoff)
                .count()
        }
        PolicyKind::LargestEigengap => {
            // negative eigenvalues carry no cluster signal; treat them as 0
            let clipped = |i: usize| eigenvalues[i].max(0.0);
            let last = cap.min(n - 1);
            let mut best = 1;
            let mut best_gap = f64::NEG_INFINITY;
            for i in 1..=last {
                let gap = clipped(i - 1) - clipped(i);
                if gap > best_gap {
                    best_gap = gap;
                    best = i;
                }
            }
            best
        }
    };
    Ok(k.clamp(1, cap))
}

pub fn estimate_k_matrix(matrix: &SymMatrix, policy: SignificancePolicy) -> Result<SpectrumReport> {
    policy.validate()?;
    if matrix.n() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: matrix.n(),
        });
    }
    let eigenvalues = sorted_eigenvalues(matrix)?;
    let estimated_k = estimate_k_from_spectrum(&eigenvalues, policy)?;
    Ok(SpectrumReport {
        eigenvalues,
        estimated_k,
        policy,
    })
}

pub fn estimate_k(gram: &GramMatrix, policy: SignificancePolicy) -> Result<SpectrumReport> {
    estimate_k_matrix(&gram.matrix, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ones_blocks(sizes: &[usize]) -> SymMatrix {
        let owner: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect();
        SymMatrix::try_from_upper(owner.len(), |i, j| {
            Ok(if owner[i] == owner[j] { 1.0 } else { 0.0 })
        })
        .unwrap()
    }

    #[test]
    fn ratio_threshold_counts_above_cutoff() {
        let k = estimate_k_from_spectrum(&[5.0, 5.0, 5.0, 0.1, 0.1], SignificancePolicy::ratio(0.1))
            .unwrap();
        assert_eq!(k, 3);
    }

    #[test]
    fn ratio_threshold_ignores_negative_eigenvalues() {
        // with λ_1 < 0 nothing qualifies; the count floors at 1
        let k = estimate_k_from_spectrum(&[-1.0, -2.0, -3.0], SignificancePolicy::ratio(0.5))
            .unwrap();
        assert_eq!(k, 1);
    }

    #[test]
    fn eigengap_uneven_blocks() {
        let report = estimate_k_matrix(&ones_blocks(&[3, 3, 4]), SignificancePolicy::eigengap())
            .unwrap();
        assert!((report.eigenvalues[0] - 4.0).abs() < 1e-12);
        assert!((report.eigenvalues[1] - 3.0).abs() < 1e-12);
        assert!((report.eigenvalues[2] - 3.0).abs() < 1e-12);
        assert!(report.eigenvalues[3..].iter().all(|l| l.abs() < 1e-12));
        assert_eq!(report.estimated_k, 3);
    }

    #[test]
    fn eigengap_ties_prefer_smaller_index() {
        // gaps: 1, 1, 1
        let k = estimate_k_from_spectrum(&[3.0, 2.0, 1.0, 0.0], SignificancePolicy::eigengap())
            .unwrap();
        assert_eq!(k, 1);
    }

    #[test]
    fn max_k_caps_the_estimate() {
        let spectrum = [4.0, 4.0, 4.0, 4.0, 0.0, 0.0];
        let k = estimate_k_from_spectrum(&spectrum, SignificancePolicy::ratio(0.5).with_max_k(2))
            .unwrap();
        assert_eq!(k, 2);
        let k = estimate_k_from_spectrum(&spectrum, SignificancePolicy::eigengap().with_max_k(3))
            .unwrap();
        assert!(k <= 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(estimate_k_from_spectrum(&[1.0], SignificancePolicy::eigengap()).is_err());
        assert!(estimate_k_from_spectrum(&[1.0, 0.5], SignificancePolicy::ratio(1.0)).is_err());
        assert!(estimate_k_from_spectrum(&[1.0, 0.5], SignificancePolicy::ratio(0.0)).is_err());
        assert!(estimate_k_matrix(&SymMatrix::identity(1), SignificancePolicy::eigengap()).is_err());
    }

    proptest! {
        #[test]
        fn equal_ones_blocks_recover_block_count(b in 1usize..6, size in 2usize..8) {
            let m = ones_blocks(&vec![size; b]);
            for policy in [SignificancePolicy::eigengap(), SignificancePolicy::ratio(0.05)] {
                let r = estimate_k_matrix(&m, policy).unwrap();
                if b == 1 {
                    prop_assert_eq!(r.estimated_k, 1);
                } else {
                    prop_assert_eq!(r.estimated_k, b);
                }
            }
        }

        #[test]
        fn invariant_under_permutation_and_scaling(
            sizes in proptest::collection::vec(2usize..6, 2..5),
            seed in any::<u64>(),
            c in 0.01f64..100.0,
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let m = ones_blocks(&sizes);
            let mut perm: Vec<usize> = (0..m.n()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = m.permuted(&perm).unwrap();
            for policy in [SignificancePolicy::eigengap(), SignificancePolicy::ratio(0.05)] {
                let base = estimate_k_matrix(&m, policy).unwrap().estimated_k;
                prop_assert_eq!(estimate_k_matrix(&shuffled, policy).unwrap().estimated_k, base);
            }
            let ratio = SignificancePolicy::ratio(0.05);
            prop_assert_eq!(
                estimate_k_matrix(&m.scaled(c), ratio).unwrap().estimated_k,
                estimate_k_matrix(&m, ratio).unwrap().estimated_k
            );
        }

        #[test]
        fn estimate_within_bounds(
            spectrum in proptest::collection::vec(-1.0f64..10.0, 2..20),
            max_k in 1usize..25,
            tau in 0.01f64..0.99,
        ) {
            let mut s = spectrum;
            s.sort_by(|a, b| b.total_cmp(a));
            let n = s.len();
            for policy in [SignificancePolicy::eigengap().with_max_k(max_k), SignificancePolicy::ratio(tau).with_max_k(max_k)] {
                let k = estimate_k_from_spectrum(&s, policy).unwrap();
                prop_assert!(k >= 1 && k <= max_k.min(n));
            }
        }
    }
}
