//! Overlapping k-means.
//!
//! Each point `x_i` is assigned a non-empty set of clusters `A_i` and is
//! represented by its *image*, the mean of the prototypes of those clusters.
//! The algorithm alternates two steps that each minimize
//! `J = Σ_i d(x_i, image(A_i))`:
//!
//! * assignment: per point, greedily grow `A_i` from the nearest prototype
//!   while the image keeps getting closer;
//! * prototype update: per cluster, the weighted mean of the residual targets
//!   `|A_i|·x_i − Σ_{c' ≠ c} m_{c'}` with weights `1/|A_i|²`.
//!
//! With a kernel-induced dissimilarity the prototypes and images stay in
//! input space; only the distance changes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataio::DataMatrix;
use crate::divergences::{check_non_negative, Dissimilarity};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_REL_TOL: f64 = 1e-6;

/// Floor for the denominator of the relative-improvement test.
const REL_TOL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AssignmentsUnchanged,
    RelativeTolerance,
    MaxIterations,
    /// The objective went up; the previous state was restored.
    ObjectiveIncreased,
}

/// Result of an OKM run: cluster sets per point plus prototypes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Covering {
    pub k: usize,
    /// Zero-based cluster ids per point, sorted ascending, never empty.
    pub assignments: Vec<Vec<usize>>,
    pub prototypes: Vec<Vec<f64>>,
    pub objective: f64,
    /// Completed assignment/update rounds after the initial assignment.
    pub iterations: usize,
    /// Objective after the initial assignment and after every accepted round.
    pub history: Vec<f64>,
    pub stop_reason: StopReason,
}

impl Covering {
    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    /// Point indices per cluster.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, set) in self.assignments.iter().enumerate() {
            for &c in set {
                out[c].push(i);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OkmConfig {
    pub k: usize,
    pub dissimilarity: Dissimilarity,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl OkmConfig {
    pub fn new(k: usize, dissimilarity: Dissimilarity) -> Self {
        Self {
            k,
            dissimilarity,
            max_iter: DEFAULT_MAX_ITER,
            rel_tol: DEFAULT_REL_TOL,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidSpec("k must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidSpec("max_iter must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidSpec(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        self.dissimilarity.validate()
    }
}

/// Mean of the prototypes of the clusters in `assigned`.
pub fn image(assigned: &[usize], prototypes: &[Vec<f64>]) -> Result<Vec<f64>> {
    let (&first, rest) = assigned.split_first().ok_or(Error::EmptyAssignment)?;
    let k = prototypes.len();
    let lookup = |c: usize| prototypes.get(c).ok_or(Error::InvalidCluster { id: c, k });
    let mut sum = lookup(first)?.clone();
    for &c in rest {
        for (s, v) in sum.iter_mut().zip(lookup(c)?) {
            *s += v;
        }
    }
    let scale = 1.0 / assigned.len() as f64;
    sum.iter_mut().for_each(|s| *s *= scale);
    Ok(sum)
}

fn objective_of(
    assignments: &[Vec<usize>],
    prototypes: &[Vec<f64>],
    d: &Dissimilarity,
    data: &DataMatrix,
) -> Result<f64> {
    if assignments.len() != data.n() {
        return Err(Error::DimensionMismatch {
            expected: data.n(),
            got: assignments.len(),
        });
    }
    let mut total = 0.0;
    for (x, set) in data.rows().zip(assignments) {
        total += d.dissim(x, &image(set, prototypes)?)?;
    }
    Ok(total)
}

/// `Σ_i d(x_i, image(A_i))` recomputed from scratch.
pub fn objective(cov: &Covering, d: &Dissimilarity, data: &DataMatrix) -> Result<f64> {
    objective_of(&cov.assignments, &cov.prototypes, d, data)
}

/// Greedy overlapping assignment of one point.
///
/// Clusters are visited by increasing distance to their prototype; each is
/// added while doing so brings the image strictly closer to `x`. If
/// `previous` still yields a strictly closer image, it is kept instead, so a
/// point's contribution to the objective never grows.
pub fn assign_point(
    x: &[f64],
    prototypes: &[Vec<f64>],
    d: &Dissimilarity,
    previous: Option<&[usize]>,
) -> Result<Vec<usize>> {
    if prototypes.is_empty() {
        return Err(Error::InvalidSpec("no prototypes".into()));
    }
    let mut ranked = Vec::with_capacity(prototypes.len());
    for (c, m) in prototypes.iter().enumerate() {
        ranked.push((d.dissim(x, m)?, c));
    }
    // stable sort keeps id order among ties
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (mut best, nearest) = ranked[0];
    let mut chosen = vec![nearest];
    let mut sum = prototypes[nearest].clone();
    let mut trial = vec![0.0; x.len()];
    for &(_, c) in &ranked[1..] {
        let size = (chosen.len() + 1) as f64;
        for ((t, s), v) in trial.iter_mut().zip(&sum).zip(&prototypes[c]) {
            *t = (s + v) / size;
        }
        let value = d.dissim(x, &trial)?;
        if value < best {
            best = value;
            chosen.push(c);
            sum.iter_mut().zip(&prototypes[c]).for_each(|(s, v)| *s += v);
        } else {
            break;
        }
    }
    chosen.sort_unstable();

    if let Some(prev) = previous {
        if d.dissim(x, &image(prev, prototypes)?)? < best {
            let mut prev = prev.to_vec();
            prev.sort_unstable();
            return Ok(prev);
        }
    }
    Ok(chosen)
}

/// One sweep of prototype updates with assignments held fixed.
///
/// Clusters are updated in id order; each update sees the already-updated
/// prototypes of lower ids. A cluster with no members keeps its prototype.
pub fn update_prototypes(
    assignments: &[Vec<usize>],
    prototypes: &[Vec<f64>],
    data: &DataMatrix,
) -> Vec<Vec<f64>> {
    let k = prototypes.len();
    let p = data.p();
    let mut members = vec![Vec::new(); k];
    for (i, set) in assignments.iter().enumerate() {
        for &c in set {
            members[c].push(i);
        }
    }
    let mut protos = prototypes.to_vec();
    let mut target = vec![0.0; p];
    for c in 0..k {
        if members[c].is_empty() {
            continue;
        }
        let mut acc = vec![0.0; p];
        let mut weight_sum = 0.0;
        for &i in &members[c] {
            let set = &assignments[i];
            let size = set.len() as f64;
            for (t, x) in target.iter_mut().zip(data.row(i)) {
                *t = size * x;
            }
            for &other in set.iter().filter(|&&o| o != c) {
                for (t, m) in target.iter_mut().zip(&protos[other]) {
                    *t -= m;
                }
            }
            let w = 1.0 / (size * size);
            for (a, t) in acc.iter_mut().zip(&target) {
                *a += w * t;
            }
            weight_sum += w;
        }
        acc.iter_mut().for_each(|a| *a /= weight_sum);
        protos[c] = acc;
    }
    protos
}

/// `k` distinct rows drawn uniformly without replacement.
pub fn initial_prototypes(data: &DataMatrix, k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if data.n() < k {
        return Err(Error::InsufficientData {
            needed: k,
            got: data.n(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, data.n(), k)
        .into_iter()
        .map(|i| data.row(i).to_vec())
        .collect())
}

fn assign_all(
    data: &DataMatrix,
    prototypes: &[Vec<f64>],
    d: &Dissimilarity,
    previous: Option<&[Vec<usize>]>,
) -> Result<Vec<Vec<usize>>> {
    data.rows()
        .enumerate()
        .map(|(i, x)| assign_point(x, prototypes, d, previous.map(|p| p[i].as_slice())))
        .collect()
}

pub fn run_okm(data: &DataMatrix, config: &OkmConfig) -> Result<Covering> {
    config.validate()?;
    let init = initial_prototypes(data, config.k, config.seed)?;
    run_okm_from(data, config, init)
}

/// Runs OKM from the given starting prototypes (`config.seed` is unused).
pub fn run_okm_from(
    data: &DataMatrix,
    config: &OkmConfig,
    mut prototypes: Vec<Vec<f64>>,
) -> Result<Covering> {
    config.validate()?;
    if data.n() < config.k {
        return Err(Error::InsufficientData {
            needed: config.k,
            got: data.n(),
        });
    }
    if prototypes.len() != config.k {
        return Err(Error::DimensionMismatch {
            expected: config.k,
            got: prototypes.len(),
        });
    }
    if let Some(m) = prototypes.iter().find(|m| m.len() != data.p()) {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            got: m.len(),
        });
    }
    let d = &config.dissimilarity;
    let non_negative = d.requires_non_negative();
    if non_negative {
        for x in data.rows() {
            check_non_negative(x)?;
        }
    }

    let mut assignments = assign_all(data, &prototypes, d, None)?;
    let mut j = objective_of(&assignments, &prototypes, d, data)?;
    let mut history = vec![j];
    let mut iterations = 0;
    let stop_reason = loop {
        if iterations == config.max_iter {
            break StopReason::MaxIterations;
        }
        let mut next_protos = update_prototypes(&assignments, &prototypes, data);
        if non_negative {
            // keep images inside the divergence's domain
            next_protos.iter_mut().flatten().for_each(|v| *v = v.max(0.0));
        }
        let next_assign = assign_all(data, &next_protos, d, Some(&assignments))?;
        let next_j = objective_of(&next_assign, &next_protos, d, data)?;
        if next_j > j {
            break StopReason::ObjectiveIncreased;
        }
        iterations += 1;
        history.push(next_j);
        let unchanged = next_assign == assignments;
        let improvement = (j - next_j) / j.max(REL_TOL_FLOOR);
        prototypes = next_protos;
        assignments = next_assign;
        j = next_j;
        if unchanged {
            break StopReason::AssignmentsUnchanged;
        }
        if improvement < config.rel_tol {
            break StopReason::RelativeTolerance;
        }
    };

    Ok(Covering {
        k: config.k,
        assignments,
        prototypes,
        objective: j,
        iterations,
        history,
        stop_reason,
    })
}
