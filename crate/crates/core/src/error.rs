use num_complex::Complex64;
use thiserror::Error;

/// Structural problems with a graph or its parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("graph has no vertices")]
    NoVertices,
    #[error("graph has no edges")]
    NoEdges,
    #[error("graph is disconnected: vertex `{0}` is unreachable from `{1}`")]
    Disconnected(String, String),
    #[error("graph is not leafless: vertex `{vertex}` has degree {degree}")]
    Leaf { vertex: String, degree: usize },
    #[error("edge `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("edge `{edge}` has nonpositive weight a={a}")]
    NonPositiveWeight { edge: String, a: f64 },
    #[error("{kind} `{id}` is missing its parameter")]
    MissingParameter { kind: &'static str, id: String },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("parameter `{0}` is not finite")]
    NonFinite(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid graph: {0}")]
    Validation(#[from] ValidationError),
    #[error("invalid input: {0}")]
    Precondition(String),
    #[error("matrix is not symmetric: entry ({row},{col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },
    #[error("m-function solver failed at z = {z}: {reason}")]
    Solver { z: Complex64, reason: String },
    #[error("tree ball of radius {radius} needs more than {budget} nodes")]
    NodeBudget { radius: usize, budget: usize },
    #[error("vector support reaches depth {depth}, but at most {allowed} is allowed")]
    Support { depth: usize, allowed: usize },
    #[error("evaluation at a pole z = {0}")]
    Pole(Complex64),
    #[error("limit sequence at z0 = {z0} is inconsistent: {detail}")]
    InconsistentLimit { z0: Complex64, detail: String },
    #[error("scan aborted: solver failed on {failed} of {total} grid points (first failure at x = {first_x})")]
    ScanFailures {
        failed: usize,
        total: usize,
        first_x: f64,
    },
}

impl Error {
    /// True for errors caused by malformed input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Validation(_) | Error::Precondition(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
