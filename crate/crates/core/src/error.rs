use thiserror::Error;

use crate::lp::LpError;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid random variable: {0}")]
    InvalidVariable(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("invalid scenario tree: {0}")]
    InvalidTree(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid ambiguity set: {0}")]
    InvalidAmbiguity(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("composite evaluation hit an unreachable atom at stage {stage}, atom {atom}")]
    UnreachableAtom { stage: usize, atom: usize },
    #[error("{what}: enumeration of {count} items exceeds cap {cap}; use a smaller instance")]
    CapExceeded {
        what: String,
        count: u128,
        cap: u128,
    },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("Lipschitz certificate violated between scenarios {first} and {second}: |dZ| = {lhs} > {rhs}")]
    LipschitzViolation {
        first: usize,
        second: usize,
        lhs: f64,
        rhs: f64,
    },
    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
