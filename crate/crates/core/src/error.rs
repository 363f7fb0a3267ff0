use alloc::string::String;

/// Errors raised by core operations.
///
/// Solver refusals are errors, never silent approximations: a caller that
/// sees [`Error::TooLarge`] knows no value was computed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("graph on {n} vertices exceeds the supported maximum of {max}")]
    GraphTooLarge { n: usize, max: usize },

    #[error("{what}: instance of size {size} exceeds the solver limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("out-degree {degree} of vertex {vertex} exceeds the bound {bound}")]
    OutDegreeExceeded {
        vertex: usize,
        degree: usize,
        bound: usize,
    },

    #[error("digraph has a directed cycle through vertex {0}")]
    Cyclic(usize),

    #[error("unknown identifier: {0}")]
    Unknown(String),
}

pub type Result<T> = core::result::Result<T, Error>;
