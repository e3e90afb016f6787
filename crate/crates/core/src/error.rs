use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node {node} out of range 1..={p}")]
    NodeOutOfRange { node: usize, p: usize },

    #[error("node set must be nonempty")]
    EmptyNodeSet,

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("index set must be a nonempty proper subset of 1..={0}")]
    InvalidIndexSet(usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("off-pattern entries exceed tolerance: {}", format_violations(.0))]
    PatternViolation(Vec<(usize, usize, f64)>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("graph not decomposable")]
    NotDecomposable,

    #[error("node set {0:?} is not a clique")]
    NotAClique(Vec<usize>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite log acceptance ratio")]
    NonFiniteRatio,

    #[error("kernel list is empty")]
    EmptyKernelList,

    #[error("empty input")]
    EmptyInput,

    #[error("chain {index}: {source}")]
    Chain { index: usize, source: Box<Error> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn format_violations(v: &[(usize, usize, f64)]) -> String {
    v.iter()
        .map(|(i, j, x)| format!("({i},{j})={x:e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite | Error::NotSymmetric(_) | Error::PatternViolation(_) => {
                true
            }
            Error::Chain { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
