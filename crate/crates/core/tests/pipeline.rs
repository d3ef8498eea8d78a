use std::path::Path;

use okm_core::dataio::DEFAULT_LABEL_SEPARATOR;
use okm_core::okm::{objective, run_okm_from};
use okm_core::{
    estimate_k, gram, load_csv, pair_metrics, run_okm, DataMatrix, Dissimilarity, KernelSpec,
    LabelColumn, OkmConfig, SignificancePolicy,
};

fn iris() -> DataMatrix {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/iris.csv");
    load_csv(&p, LabelColumn::Last, DEFAULT_LABEL_SEPARATOR).unwrap()
}

#[test]
fn iris_shape() {
    let data = iris();
    assert_eq!((data.n(), data.p()), (150, 4));
    let labels = data.labels().unwrap();
    assert_eq!(labels.names().len(), 3);
    for id in 0..3 {
        let count = labels.sets().iter().filter(|s| s.as_slice() == [id]).count();
        assert_eq!(count, 50);
    }
}

#[test]
fn iris_rbf_spectrum_is_dominated_by_first_eigenvalue() {
    let data = iris();
    let g = gram(KernelSpec::Rbf { sigma: 150.0 }, &data).unwrap();
    let r = estimate_k(&g, SignificancePolicy::default()).unwrap();
    let l = &r.eigenvalues;
    assert_eq!(l.len(), 150);
    assert!((l.iter().sum::<f64>() - 150.0).abs() < 1e-8);
    assert!(l[0] > 149.0);
    assert!(l.windows(2).all(|w| w[0] >= w[1]));
}

// Far-apart blobs: once every point lands in exactly one cluster, OKM
// reduces to Lloyd's k-means and prototypes are the cluster means.
#[test]
fn separated_blobs_match_kmeans() {
    let rows: Vec<Vec<f64>> = [
        [0.0, 0.0], [0.5, 0.1], [0.2, 0.4],
        [100.0, 0.0], [100.3, 0.2], [99.8, 0.1],
        [0.0, 100.0], [0.1, 100.4], [0.3, 99.9],
    ]
    .iter()
    .map(|r| r.to_vec())
    .collect();
    let data = DataMatrix::from_rows(rows.clone(), None).unwrap();
    let init = vec![rows[0].clone(), rows[3].clone(), rows[6].clone()];
    let cfg = OkmConfig::new(3, Dissimilarity::SquaredEuclidean);
    let cov = run_okm_from(&data, &cfg, init).unwrap();
    for (i, set) in cov.assignments.iter().enumerate() {
        assert_eq!(set, &vec![i / 3]);
    }
    for c in 0..3 {
        for j in 0..2 {
            let mean = (0..3).map(|t| rows[3 * c + t][j]).sum::<f64>() / 3.0;
            assert!((cov.prototypes[c][j] - mean).abs() < 1e-9);
        }
    }
}

#[test]
fn runs_are_reproducible_and_history_is_monotone() {
    let data = iris().without_labels();
    for d in [
        Dissimilarity::SquaredEuclidean,
        Dissimilarity::idivergence(),
        Dissimilarity::kernel(KernelSpec::Polynomial { degree: 0.25 }),
    ] {
        let cfg = OkmConfig::new(3, d).with_seed(7);
        let a = run_okm(&data, &cfg).unwrap();
        let b = run_okm(&data, &cfg).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.prototypes, b.prototypes);
        assert!(a.history.windows(2).all(|w| w[1] <= w[0] + 1e-9 * w[0].abs()));
        let j = objective(&a, &d, &data).unwrap();
        assert!((j - a.objective).abs() <= 1e-9 * j.abs().max(1.0));
        assert!(a.assignments.iter().all(|s| !s.is_empty()));
    }
}

#[test]
fn iris_scores_are_well_formed() {
    let data = iris();
    let cov = run_okm(&data, &OkmConfig::new(3, Dissimilarity::SquaredEuclidean)).unwrap();
    let m = pair_metrics(&cov, data.labels().unwrap()).unwrap();
    assert!(m.ntlp == 3 * 50 * 49 / 2);
    assert!((0.0..=1.0).contains(&m.precision));
    assert!((0.0..=1.0).contains(&m.recall));
    assert!(m.f_measure > 0.5);
}
