use thiserror::Error;

use crate::report::Report;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("parent mismatch: {0}")]
    Parent(String),
    #[error("degree {degree} exceeds the materialization cap {cap}")]
    Cap { degree: usize, cap: usize },
    #[error("not a *-algebra: {0}")]
    Algebra(String),
    #[error("rank is ambiguous at tolerance: singular value {value:e} (relative to {scale:e})")]
    Degeneracy { value: f64, scale: f64 },
    #[error("invalid chain: {0}")]
    Chain(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("decomposition error: {0}")]
    Decomposition(String),
    #[error("validation failed: {}", .0.failures().join("; "))]
    Validation(Box<Report>),
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("size guard: {0}")]
    Sizing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
