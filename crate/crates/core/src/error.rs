use thiserror::Error;

use crate::diagram::{ValidationReport, VertexId};

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("invalid diagram: {}", .0.first_error().unwrap_or("unknown"))]
    Invalid(ValidationReport),

    #[error("vertex {0} is out of range")]
    VertexOutOfRange(VertexId),

    #[error("vertices {0} and {1} are not on consecutive levels")]
    NonAdjacentLevels(VertexId, VertexId),

    #[error("paths have different ranges: {0} and {1}")]
    RangeMismatch(VertexId, VertexId),

    #[error("not a completion: {0}")]
    NotACompletion(String),

    #[error("level cap {cap} exceeds the {available} available levels")]
    LevelCap { cap: usize, available: usize },
}
