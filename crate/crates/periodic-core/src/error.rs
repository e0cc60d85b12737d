use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("unsupported dimension {0} (expected 1..=3)")]
    Dimension(usize),
    #[error("invalid field spec: {0}")]
    Spec(String),
    #[error("non-finite sample value at node {0}")]
    NonFinite(usize),
    #[error("field is not positive: smallest eigenvalue {value:e} at node {node}")]
    NotPositive { value: f64, node: usize },
    #[error("singular value at node {0}")]
    Singular(usize),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("rank condition fails: alpha0 = {0:e}")]
    Rank(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("lattice error: {0}")]
    Lattice(String),
}
