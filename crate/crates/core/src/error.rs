use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("unsupported quadrature order {0} (expected 1 or 2)")]
    QuadratureOrder(usize),

    #[error("point {point:?} lies outside the domain")]
    OutOfDomain { point: [f64; 2] },

    #[error("point #{index} {point:?} lies outside the domain")]
    OutOfDomainAt { index: usize, point: [f64; 2] },

    #[error("RBF width must be positive, got {0}")]
    NonPositiveWidth(f64),

    #[error("dictionary is empty")]
    EmptyDictionary,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("row {row}: basis sum underflows to zero")]
    RowUnderflow { row: usize },

    #[error("cell {cell}: value {value} is not strictly positive")]
    NonPositiveValue { cell: usize, value: f64 },

    #[error("subdomain {index}: {source}")]
    Subdomain {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("coefficient sample {value} at {point:?} is not strictly positive")]
    NonPositiveCoefficient { value: f64, point: [f64; 2] },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("zero-norm reference")]
    ZeroNorm,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("token #{offset}: cannot parse {token:?} as a number")]
    BadToken { offset: usize, token: String },

    #[error("unexpected end of input: {0}")]
    Truncated(String),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: String, expected: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::QuadratureOrder(_) | Error::NonPositiveWidth(_) => {
                ErrorKind::Config
            }
            Error::Mesh(_) | Error::EmptyDictionary | Error::DimensionMismatch(_) => {
                ErrorKind::Config
            }
            Error::RowUnderflow { .. }
            | Error::Singular(_)
            | Error::SolverDiverged { .. }
            | Error::Quadrature(_)
            | Error::NonFinite(_)
            | Error::ZeroNorm => ErrorKind::Numerical,
            Error::Subdomain { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
