use thiserror::Error;

use crate::config::ConfigError;
use crate::expr::ExprError;
use crate::grid::Side;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("side mismatch: expected {expected} vector, got {got}")]
    SideMismatch { expected: Side, got: Side },

    #[error("index {index} out of range ({len} nodes)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("under-resolved mollifier: {nodes} nodes within 3/L of the centre at L = {l}")]
    UnderResolved { nodes: usize, l: f64 },

    #[error("kernel `{family}` is distributional: {what}")]
    Distributional { family: &'static str, what: &'static str },

    #[error("kernel `{0}` is not a real symmetric kernel")]
    NotSymmetric(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (most negative eigenvalue {min_eigenvalue:e})")]
    Indefinite { min_eigenvalue: f64 },

    #[error("numerically singular operator (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("operator is not Hermitian (relative deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("base point has zero norm")]
    ZeroBasePoint,

    #[error("integration produced a non-finite state at tau = {tau}")]
    NonFiniteState { tau: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
