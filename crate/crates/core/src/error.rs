use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("frame is not orthonormal (Gram residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("vector has zero or non-finite norm")]
    DegenerateVector,

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("eigenvalue pairing failed: {0}")]
    Pairing(String),

    #[error("malformed subequation: {0}")]
    MalformedSubequation(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("not a Garding operator: {0}")]
    NotGarding(String),

    #[error("hyperbolicity violation: residual {residual:e} on matrix {matrix:?}")]
    HyperbolicityViolation { matrix: Vec<Vec<f64>>, residual: f64 },

    #[error("plane family is empty or cannot produce a plane: {0}")]
    EmptyFamily(String),

    #[error("chain validation failed: {0}")]
    ChainValidation(String),

    #[error("field evaluation failed: {0}")]
    Field(String),

    #[error("field is not convex: u_r increased by {excess:e} at radius {radius} and point {point:?}")]
    NotConvex { radius: f64, point: Vec<f64>, excess: f64 },

    #[error("schedule invalid: {0}")]
    Schedule(String),

    #[error("jet invalid: {0}")]
    Jet(String),

    #[error("parse error: {0}")]
    Parse(String),
}
