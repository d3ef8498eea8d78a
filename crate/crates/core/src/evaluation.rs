//! Pair-counting validation for overlapping clusterings.
//!
//! A pair of points is *linked* when the two share at least one cluster.
//! Precision and recall compare the linked pairs of a predicted covering
//! against those of the ground truth.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::okm::Covering;

/// Anything that assigns each of `n` points a set of group ids.
pub trait Memberships {
    /// Sorted, de-duplicated group ids per point.
    fn membership_sets(&self) -> &[Vec<usize>];
}

impl Memberships for Covering {
    fn membership_sets(&self) -> &[Vec<usize>] {
        &self.assignments
    }
}

/// Ground-truth categories, possibly several per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCovering {
    label_sets: Vec<Vec<usize>>,
    names: Vec<String>,
}

impl LabeledCovering {
    /// `sets[i]` holds indices into `names`.
    pub fn new(sets: Vec<Vec<usize>>, names: Vec<String>) -> Result<Self> {
        let mut label_sets = Vec::with_capacity(sets.len());
        for mut s in sets {
            if s.is_empty() {
                return Err(Error::EmptyAssignment);
            }
            if let Some(&id) = s.iter().find(|&&id| id >= names.len()) {
                return Err(Error::InvalidCluster {
                    id,
                    k: names.len(),
                });
            }
            s.sort_unstable();
            s.dedup();
            label_sets.push(s);
        }
        Ok(Self { label_sets, names })
    }

    /// Numbers labels in order of first appearance.
    pub fn from_names(sets: Vec<Vec<String>>) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut ids = Vec::with_capacity(sets.len());
        for set in sets {
            let row = set
                .into_iter()
                .map(|name| match names.iter().position(|n| *n == name) {
                    Some(i) => i,
                    None => {
                        names.push(name);
                        names.len() - 1
                    }
                })
                .collect();
            ids.push(row);
        }
        Self::new(ids, names)
    }

    /// Unnamed labels; names are the ids themselves.
    pub fn from_sets(sets: Vec<Vec<usize>>) -> Result<Self> {
        let count = sets.iter().flatten().max().map_or(0, |m| m + 1);
        Self::new(sets, (0..count).map(|i| i.to_string()).collect())
    }

    pub fn n(&self) -> usize {
        self.label_sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.label_sets
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl Memberships for LabeledCovering {
    fn membership_sets(&self) -> &[Vec<usize>] {
        &self.label_sets
    }
}

/// Intersection test on two sorted id lists.
fn share_any(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// All `(i, j)` with `i < j` whose membership sets intersect.
pub fn linked_pairs<M: Memberships + ?Sized>(c: &M) -> BTreeSet<(usize, usize)> {
    let sets = c.membership_sets();
    let mut out = BTreeSet::new();
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            if share_any(&sets[i], &sets[j]) {
                out.insert((i, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairMetrics {
    /// Correctly identified linked pairs.
    pub ncilp: u64,
    /// Identified (predicted) linked pairs.
    pub nilp: u64,
    /// True linked pairs.
    pub ntlp: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl PairMetrics {
    /// Derives the ratios from counts. Empty denominators resolve to 1 when
    /// both sides have no linked pairs and to 0 otherwise.
    pub fn from_counts(ncilp: u64, nilp: u64, ntlp: u64) -> Self {
        let ratio = |num: u64, den: u64, other: u64| {
            if den == 0 {
                if other == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(ncilp, nilp, ntlp);
        let recall = ratio(ncilp, ntlp, nilp);
        let f_measure = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            ncilp,
            nilp,
            ntlp,
            precision,
            recall,
            f_measure,
        }
    }
}

pub fn pair_metrics<P, T>(predicted: &P, truth: &T) -> Result<PairMetrics>
where
    P: Memberships + ?Sized,
    T: Memberships + ?Sized,
{
    let pred = predicted.membership_sets();
    let gold = truth.membership_sets();
    if pred.len() != gold.len() {
        return Err(Error::DimensionMismatch {
            expected: gold.len(),
            got: pred.len(),
        });
    }
    let (mut ncilp, mut nilp, mut ntlp) = (0u64, 0u64, 0u64);
    for i in 0..pred.len() {
        for j in (i + 1)..pred.len() {
            let p = share_any(&pred[i], &pred[j]);
            let t = share_any(&gold[i], &gold[j]);
            nilp += p as u64;
            ntlp += t as u64;
            ncilp += (p && t) as u64;
        }
    }
    Ok(PairMetrics::from_counts(ncilp, nilp, ntlp))
}
