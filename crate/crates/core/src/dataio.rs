//! Datasets: the in-memory matrix, CSV loading/saving and a synthetic
//! generator for overlapping groups.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::evaluation::LabeledCovering;
use crate::okm::Covering;

pub const DEFAULT_LABEL_SEPARATOR: char = '|';

/// `n × p` observations, row-major, with optional ground-truth label sets.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
    labels: Option<LabeledCovering>,
}

impl DataMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Option<LabeledCovering>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if n > 0 && p == 0 {
            return Err(Error::InvalidSpec("rows must have at least one feature".into()));
        }
        let mut values = Vec::with_capacity(n * p);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != p {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: p,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: i,
                    column: j,
                    message: format!("non-finite value {}", row[j]),
                });
            }
            values.extend(row);
        }
        if let Some(l) = &labels {
            if l.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: l.n(),
                });
            }
        }
        Ok(Self {
            n,
            p,
            values,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p.max(1)).take(self.n)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&LabeledCovering> {
        self.labels.as_ref()
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }
}

/// Which CSV column, if any, holds the label sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    None,
    Last,
    /// Zero-based column index.
    Index(usize),
}

impl std::str::FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "NONE" | "none" => Ok(LabelColumn::None),
            "last" => Ok(LabelColumn::Last),
            other => other
                .parse()
                .map(LabelColumn::Index)
                .map_err(|_| format!("expected `last`, `NONE` or a column index, got `{other}`")),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, label_column: LabelColumn, separator: char) -> Result<DataMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, label_column, separator)
}

fn parse_feature(field: &str, row: usize, column: usize) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(Error::Parse {
            row,
            column,
            message: format!("non-finite value {v}"),
        }),
        Err(_) => Err(Error::Parse {
            row,
            column,
            message: format!("`{field}` is not a number"),
        }),
    }
}

/// Parses CSV text. Row and column numbers in errors are 1-based and refer
/// to the file as written (header included).
pub fn parse_csv(text: &str, label_column: LabelColumn, separator: char) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: i + 1,
            column: 0,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    let first = records.first().ok_or(Error::EmptyFile)?;
    let width = first.len();
    let label_idx = match label_column {
        LabelColumn::None => None,
        LabelColumn::Last => Some(width - 1),
        LabelColumn::Index(i) if i < width => Some(i),
        LabelColumn::Index(i) => {
            return Err(Error::Parse {
                row: 1,
                column: i + 1,
                message: format!("label column {i} out of range for {width} columns"),
            })
        }
    };
    let feature_cols: Vec<usize> = (0..width).filter(|c| Some(*c) != label_idx).collect();
    if feature_cols.is_empty() {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "no feature columns".into(),
        });
    }

    let has_header = feature_cols
        .iter()
        .any(|&c| first[c].parse::<f64>().is_err());
    let body = if has_header { &records[1..] } else { &records[..] };
    if body.is_empty() {
        return Err(Error::EmptyFile);
    }
    let offset = if has_header { 2 } else { 1 };

    let mut rows = Vec::with_capacity(body.len());
    let mut label_names = Vec::new();
    for (i, rec) in body.iter().enumerate() {
        let line = i + offset;
        if rec.len() != width {
            return Err(Error::RaggedRows {
                row: line,
                expected: width,
                found: rec.len(),
            });
        }
        let row = feature_cols
            .iter()
            .map(|&c| parse_feature(&rec[c], line, c + 1))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
        if let Some(c) = label_idx {
            let set: Vec<String> = rec[c]
                .split(separator)
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect();
            if set.is_empty() {
                return Err(Error::Parse {
                    row: line,
                    column: c + 1,
                    message: "empty label set".into(),
                });
            }
            label_names.push(set);
        }
    }
    let labels = label_idx.map(|_| LabeledCovering::from_names(label_names)).transpose()?;
    DataMatrix::from_rows(rows, labels)
}

/// Serializes a dataset to CSV (header `x1..xp[,labels]`). Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv(data: &DataMatrix, separator: char) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).collect();
    out.push_str(&header.join(","));
    if data.labels().is_some() {
        out.push_str(",labels");
    }
    out.push('\n');
    for (i, row) in data.rows().enumerate() {
        let fields: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&fields.join(","));
        if let Some(labels) = data.labels() {
            let names: Vec<&str> = labels.sets()[i]
                .iter()
                .map(|&id| labels.name(id))
                .collect();
            out.push(',');
            out.push_str(&names.join(&separator.to_string()));
        }
        out.push('\n');
    }
    out
}

/// Covering output: `index,cluster_ids`, zero-based row index, one-based
/// cluster ids joined with `|`.
pub fn write_covering_csv(covering: &Covering) -> String {
    let mut out = String::from("index,cluster_ids\n");
    for (i, set) in covering.assignments.iter().enumerate() {
        let ids: Vec<String> = set.iter().map(|c| (c + 1).to_string()).collect();
        let _ = writeln!(out, "{i},{}", ids.join("|"));
    }
    out
}

/// Parameters for [`generate_synthetic`]. Cluster indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub k: usize,
    pub points_per_cluster: usize,
    /// `(a, b, m)`: `m` extra points around the midpoint of centers `a` and
    /// `b`, labeled with both.
    pub overlap_pairs: Vec<(usize, usize, usize)>,
    pub center_separation: f64,
    pub noise_scale: f64,
    pub dimension: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        if self.dimension == 0 {
            return bad("dimension must be >= 1".into());
        }
        if !(self.noise_scale > 0.0 && self.noise_scale.is_finite()) {
            return bad(format!("noise_scale must be positive, got {}", self.noise_scale));
        }
        if !(self.center_separation >= 0.0 && self.center_separation.is_finite()) {
            return bad(format!(
                "center_separation must be non-negative, got {}",
                self.center_separation
            ));
        }
        for &(a, b, m) in &self.overlap_pairs {
            if a >= self.k || b >= self.k || a == b {
                return bad(format!("invalid overlap pair ({a}, {b}) for k = {}", self.k));
            }
            if m > self.points_per_cluster {
                return bad(format!(
                    "overlap count {m} exceeds points_per_cluster {}",
                    self.points_per_cluster
                ));
            }
        }
        if self.k * self.points_per_cluster + self.overlap_pairs.iter().map(|o| o.2).sum::<usize>() == 0 {
            return bad("spec generates no points".into());
        }
        Ok(())
    }
}

/// Cluster centers with pairwise distance `sep` where the dimension allows
/// it: scaled simplex vertices when `dimension >= k`, a regular polygon in
/// the first two axes otherwise, evenly spaced on a line in 1-D.
fn centers(k: usize, dimension: usize, sep: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|c| {
            let mut v = vec![0.0; dimension];
            if k == 1 {
                return v;
            }
            if dimension >= k {
                v[c] = sep / std::f64::consts::SQRT_2;
            } else if dimension >= 2 {
                let angle = 2.0 * std::f64::consts::PI * c as f64 / k as f64;
                let radius = sep / (2.0 * (std::f64::consts::PI / k as f64).sin());
                v[0] = radius * angle.cos();
                v[1] = radius * angle.sin();
            } else {
                v[0] = sep * c as f64;
            }
            v
        })
        .collect()
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<DataMatrix> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_scale)
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let centers = centers(spec.k, spec.dimension, spec.center_separation);

    let mut rows = Vec::new();
    let mut sets = Vec::new();
    let mut sample_around = |center: &[f64], rows: &mut Vec<Vec<f64>>| {
        rows.push(center.iter().map(|c| c + noise.sample(&mut rng)).collect());
    };
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..spec.points_per_cluster {
            sample_around(center, &mut rows);
            sets.push(vec![c]);
        }
    }
    for &(a, b, m) in &spec.overlap_pairs {
        let mid: Vec<f64> = centers[a]
            .iter()
            .zip(&centers[b])
            .map(|(x, y)| 0.5 * (x + y))
            .collect();
        for _ in 0..m {
            sample_around(&mid, &mut rows);
            let mut s = vec![a, b];
            s.sort_unstable();
            sets.push(s);
        }
    }
    let names = (1..=spec.k).map(|c| format!("c{c}")).collect();
    let labels = LabeledCovering::new(sets, names)?;
    DataMatrix::from_rows(rows, Some(labels))
}
