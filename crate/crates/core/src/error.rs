use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("polytope is unbounded")]
    UnboundedPolytope,

    #[error("polytope has empty interior")]
    EmptyInterior,

    #[error("point lies on the singular set (no open piece contains it)")]
    SingularPoint,

    #[error("piece {0} has a degenerate linear part")]
    DegeneratePiece(usize),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
