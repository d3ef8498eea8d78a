use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    Asymmetric { row: usize, col: usize, gap: f64 },

    #[error("matrix must be square and non-empty (got {rows} rows, row {bad_row} has {len} entries)")]
    NotSquare { rows: usize, bad_row: usize, len: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidSpec(String),

    #[error("polynomial kernel base {base} is negative with non-integer degree {degree}")]
    DomainError { base: f64, degree: f64 },

    #[error("I-divergence requires non-negative inputs (component {index} = {value})")]
    NegativeInput { index: usize, value: f64 },

    #[error("a point must be assigned to at least one cluster")]
    EmptyAssignment,

    #[error("cluster id {id} out of range for k = {k}")]
    InvalidCluster { id: usize, k: usize },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("ragged rows: row {row} has {found} columns, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },

    #[error("empty file")]
    EmptyFile,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
