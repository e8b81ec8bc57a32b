//! Error types shared across the crate.

use thiserror::Error;

/// Construction and I/O errors for graphs and patterns.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("invalid pattern: {0}")]
    BadPattern(String),
    #[error("malformed DIMACS input: {0}")]
    BadDimacs(String),
}

/// Engine-level failures. A broken `ω(G) ≤ k` hypothesis surfaces as
/// [`EngineError::HypothesisViolation`] carrying the offending clique,
/// never as a panic.
#[derive(Debug, Error)]
pub enum EngineError {
    /// A clique larger than the caller-asserted bound was discovered mid-run.
    #[error("clique number exceeds asserted bound: found clique {clique:?}")]
    HypothesisViolation { clique: Vec<usize> },
    /// Preconditions on the parameter vector are not met; the caller should
    /// fall back (for example to the greedy branch).
    #[error("parameter refusal: {0}")]
    ParamRefusal(String),
    /// An oracle was asked to run beyond its configured limit. Oracles refuse
    /// rather than silently degrade.
    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),
    /// An internal invariant failed. This indicates a bug, not a property of
    /// the input.
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
