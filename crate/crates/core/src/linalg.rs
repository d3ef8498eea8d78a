//! Dense symmetric matrices and a cyclic Jacobi eigensolver.
//!
//! Everything here is sized for Gram matrices of a few hundred points; the
//! solver is O(n³) per sweep and converges quadratically once the
//! off-diagonal mass is small.

use crate::error::{Error, Result};

/// Largest tolerated `|a[i][j] - a[j][i]|` when building a [`SymMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-12;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Square symmetric matrix, stored dense and row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Wraps a row-major buffer, rejecting asymmetry beyond [`SYMMETRY_TOL`].
    ///
    /// The stored matrix is exactly symmetric: each lower entry is replaced
    /// by its upper mirror.
    pub fn new(n: usize, mut entries: Vec<f64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::NotSquare {
                rows: n,
                bad_row: 0,
                len: entries.len(),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let upper = entries[i * n + j];
                let lower = entries[j * n + i];
                let gap = (upper - lower).abs();
                if gap > SYMMETRY_TOL || gap.is_nan() {
                    return Err(Error::Asymmetric { row: i, col: j, gap });
                }
                entries[j * n + i] = upper;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((bad_row, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                bad_row,
                len: row.len(),
            });
        }
        Self::new(n, rows.concat())
    }

    /// Builds a matrix by evaluating `f(i, j)` on the upper triangle only and
    /// mirroring, so the result is symmetric by construction.
    pub fn try_from_upper<F>(n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<f64>,
    {
        if n == 0 {
            return Err(Error::NotSquare {
                rows: 0,
                bad_row: 0,
                len: 0,
            });
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j)?;
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n: n.max(1), entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Returns `c * self`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|v| v * c).collect(),
        }
    }

    /// Simultaneous row/column permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: perm.len(),
            });
        }
        Self::try_from_upper(self.n, |i, j| Ok(self.get(perm[i], perm[j])))
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues sorted non-increasing.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Row-major `n × n`; column `j` is the unit eigenvector for `eigenvalues[j]`.
    pub eigenvectors: Vec<f64>,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| self.eigenvectors[i * n + j]).collect()
    }
}

fn off_diagonal_mass(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps over every `(p, q)` pair with `p < q`, annihilating `a[p][q]` with a
/// plane rotation. Stops once the Frobenius norm of the off-diagonal part is
/// at most `tol`; fails with [`Error::NoConvergence`] if that has not happened
/// after `max_sweeps` sweeps.
pub fn jacobi_eigen(a: &SymMatrix, tol: f64, max_sweeps: usize) -> Result<EigenDecomposition> {
    if !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!("jacobi tol must be > 0, got {tol}")));
    }
    if max_sweeps == 0 {
        return Err(Error::InvalidSpec("jacobi max_sweeps must be >= 1".into()));
    }
    let n = a.n();
    let mut m = a.as_slice().to_vec();
    let mut v = SymMatrix::identity(n).entries;

    let mut sweeps = 0;
    let mut off = off_diagonal_mass(&m, n);
    while off > tol {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // Past the first few sweeps, drop entries that can no longer
                // change either diagonal element in floating point.
                let g = 100.0 * apq.abs();
                if sweeps > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                rotate(&mut m, &mut v, n, p, q);
            }
        }
        off = off_diagonal_mass(&m, n);
    }

    let diag: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep diagonal-index order
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[r * n + dst] = v[r * n + src];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

/// Applies the rotation that zeroes `m[p][q]`, accumulating it into `v`.
fn rotate(m: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let app = m[p * n + p];
    let aqq = m[q * n + q];
    let h = aqq - app;
    let t = if h.abs() + 100.0 * apq.abs() == h.abs() {
        apq / h
    } else {
        let theta = 0.5 * h / apq;
        let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    m[p * n + p] = app - t * apq;
    m[q * n + q] = aqq + t * apq;
    m[p * n + q] = 0.0;
    m[q * n + p] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = m[r * n + p];
        let arq = m[r * n + q];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        m[r * n + p] = new_rp;
        m[p * n + r] = new_rp;
        m[r * n + q] = new_rq;
        m[q * n + r] = new_rq;
    }
    for r in 0..n {
        let vrp = v[r * n + p];
        let vrq = v[r * n + q];
        v[r * n + p] = vrp - s * (vrq + tau * vrp);
        v[r * n + q] = vrq + s * (vrp - tau * vrq);
    }
}

/// Descending eigenvalues with the default solver settings.
pub fn sorted_eigenvalues(a: &SymMatrix) -> Result<Vec<f64>> {
    jacobi_eigen(a, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).map(|d| d.eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn diag(values: &[f64]) -> SymMatrix {
        let n = values.len();
        let mut e = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            e[i * n + i] = *v;
        }
        SymMatrix::new(n, e).unwrap()
    }

    fn ones_blocks(sizes: &[usize]) -> SymMatrix {
        let n: usize = sizes.iter().sum();
        let mut block_of = Vec::with_capacity(n);
        for (b, &s) in sizes.iter().enumerate() {
            block_of.extend(std::iter::repeat_n(b, s));
        }
        SymMatrix::try_from_upper(n, |i, j| Ok(if block_of[i] == block_of[j] { 1.0 } else { 0.0 }))
            .unwrap()
    }

    fn reconstruction_error(a: &SymMatrix, d: &EigenDecomposition) -> f64 {
        let n = a.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += d.eigenvectors[i * n + k] * d.eigenvalues[k] * d.eigenvectors[j * n + k];
                }
                worst = worst.max((s - a.get(i, j)).abs());
            }
        }
        worst
    }

    fn orthonormality_error(d: &EigenDecomposition) -> f64 {
        let n = d.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n)
                    .map(|r| d.eigenvectors[r * n + i] * d.eigenvectors[r * n + j])
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - expected).abs());
            }
        }
        worst
    }

    #[test]
    fn rejects_asymmetric_input() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-9, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::Asymmetric { row: 0, col: 1, .. }));
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-13, 1.0]]).is_ok());
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(SymMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let d = jacobi_eigen(&SymMatrix::identity(3), DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert!(orthonormality_error(&d) < 1e-15);
    }

    #[test]
    fn diagonal_input_is_sorted() {
        for order in [[9.0, 5.0, 2.0], [2.0, 9.0, 5.0], [5.0, 2.0, 9.0]] {
            assert_eq!(sorted_eigenvalues(&diag(&order)).unwrap(), vec![9.0, 5.0, 2.0]);
        }
    }

    #[test]
    fn two_by_two() {
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let d = jacobi_eigen(&a, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        assert_abs_diff_eq!(d.eigenvalues[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.eigenvalues[1], 1.0, epsilon = 1e-14);
        let v = d.eigenvector(0);
        assert_abs_diff_eq!(v[0].abs(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(v[0], v[1], epsilon = 1e-14);
    }

    #[test]
    fn scalar_matrix() {
        let a = SymMatrix::new(1, vec![-3.5]).unwrap();
        assert_eq!(sorted_eigenvalues(&a).unwrap(), vec![-3.5]);
    }

    #[test]
    fn rank_one_all_ones() {
        let ev = sorted_eigenvalues(&ones_blocks(&[4])).unwrap();
        let expected = [4.0, 0.0, 0.0, 0.0];
        for (got, want) in ev.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn block_diagonal_ones() {
        let ev = sorted_eigenvalues(&ones_blocks(&[3, 2])).unwrap();
        let expected = [3.0, 2.0, 0.0, 0.0, 0.0];
        for (got, want) in ev.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn sweep_budget_exhaustion_is_an_error() {
        let a = SymMatrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.25],
            vec![0.5, 0.25, 1.0],
        ])
        .unwrap();
        let err = jacobi_eigen(&a, 1e-300, 1).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { sweeps: 1, .. }));
        assert!(jacobi_eigen(&a, 0.0, 10).is_err());
        assert!(jacobi_eigen(&a, 1e-10, 0).is_err());
    }

    #[test]
    fn tied_eigenvalues_keep_diagonal_order() {
        let d = jacobi_eigen(&diag(&[1.0, 2.0, 1.0]), DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        assert_eq!(d.eigenvalues, vec![2.0, 1.0, 1.0]);
        assert_eq!(d.eigenvector(1), vec![1.0, 0.0, 0.0]);
        assert_eq!(d.eigenvector(2), vec![0.0, 0.0, 1.0]);
    }

    fn symmetric_matrix() -> impl Strategy<Value = SymMatrix> {
        (1usize..=30).prop_flat_map(|n| {
            proptest::collection::vec(-10.0f64..10.0, n * n).prop_map(move |raw| {
                SymMatrix::try_from_upper(n, |i, j| Ok(raw[i * n + j])).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decomposition_invariants(a in symmetric_matrix()) {
            let n = a.n();
            let d = jacobi_eigen(&a, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
            prop_assert!(d.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(reconstruction_error(&a, &d) <= 1e-8);
            prop_assert!(orthonormality_error(&d) <= 1e-8);
            let sum: f64 = d.eigenvalues.iter().sum();
            prop_assert!((sum - a.trace()).abs() <= 1e-8 * n as f64);
        }

        #[test]
        fn permutation_invariant_spectrum(a in symmetric_matrix(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut perm: Vec<usize> = (0..a.n()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let before = sorted_eigenvalues(&a).unwrap();
            let after = sorted_eigenvalues(&a.permuted(&perm).unwrap()).unwrap();
            for (x, y) in before.iter().zip(&after) {
                prop_assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()));
            }
        }
    }
}
