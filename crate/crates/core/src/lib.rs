//! Overlapping k-means (OKM) with pluggable dissimilarities.
//!
//! A point may belong to several clusters at once; it is then represented by
//! the mean of their prototypes. Besides squared Euclidean distance the
//! algorithm can run with the generalized I-divergence or with a distance
//! induced by an RBF, polynomial or linear kernel.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`linalg`] | symmetric matrices, Jacobi eigensolver |
//! | [`kernels`] | kernel functions, Gram matrices, kernel-induced distance |
//! | [`divergences`] | the [`Dissimilarity`] measures |
//! | [`model_selection`] | number of clusters from the Gram spectrum |
//! | [`okm`] | the clustering algorithm |
//! | [`evaluation`] | pair-counting precision / recall / F-measure |
//! | [`dataio`] | CSV IO, synthetic overlapping data |
//!
//! ```
//! use okm_core::{run_okm, DataMatrix, Dissimilarity, OkmConfig};
//!
//! let data = DataMatrix::from_rows(vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]], None)?;
//! let cov = run_okm(&data, &OkmConfig::new(1, Dissimilarity::SquaredEuclidean))?;
//! assert_eq!(cov.prototypes[0], vec![5.5]);
//! # Ok::<(), okm_core::Error>(())
//! ```

pub mod dataio;
pub mod divergences;
mod error;
pub mod evaluation;
pub mod kernels;
pub mod linalg;
pub mod model_selection;
pub mod okm;

pub use dataio::{generate_synthetic, load_csv, DataMatrix, LabelColumn, SyntheticSpec};
pub use divergences::Dissimilarity;
pub use error::{Error, Result};
pub use evaluation::{linked_pairs, pair_metrics, LabeledCovering, PairMetrics};
pub use kernels::{gram, kernel_distance_sq, kernel_eval, GramMatrix, KernelSpec};
pub use linalg::{jacobi_eigen, sorted_eigenvalues, EigenDecomposition, SymMatrix};
pub use model_selection::{estimate_k, PolicyKind, SignificancePolicy, SpectrumReport};
pub use okm::{run_okm, Covering, OkmConfig, StopReason};
