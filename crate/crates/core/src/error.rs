use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for CLI exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or invalid input.
    Input,
    /// Input is valid but a hypothesis of the requested computation fails.
    Hypothesis,
    /// Two independent computations disagreed. Always a bug.
    CrossCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("loop edge at vertex `{0}`")]
    LoopEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown branch `{0}`")]
    UnknownBranch(String),
    #[error("vertex `{name}` has nonnegative weight {weight}")]
    NonNegativeWeight { name: String, weight: i64 },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("{0} defined only for trees")]
    NotATree(String),
    #[error("`{other}` is not adjacent to `{vertex}`")]
    EdgeNotIncident { vertex: String, other: String },
    #[error("no edge between `{0}` and `{1}`")]
    MissingEdge(String, String),
    #[error("matrix is not square or dimensions disagree")]
    DimensionMismatch,
    #[error("matrix is not symmetric")]
    NonSymmetric,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("intersection form is not negative definite: leading minor of order {order} of -I is {minor}")]
    NotNegativeDefinite { order: usize, minor: String },
    #[error("continued fraction of the subtree rooted at `{0}` is not positive")]
    NonPositiveContinuedFraction(String),
    #[error("degree vector is identically zero")]
    ZeroDegrees,
    #[error("intersection number of branch `{0}` with itself is undefined")]
    IdenticalBranches(String),
    #[error("base branch `{0}` cannot belong to the branch family")]
    BaseInFamily(String),
    #[error("branch `{0}` occurs twice in the family")]
    DuplicateBranch(String),
    #[error("branch family is empty")]
    EmptyFamily,
    #[error("distance is not an ultrametric: {0}")]
    NotUltrametric(String),
    #[error("invalid distance matrix: {0}")]
    InvalidDistance(String),
    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(String),
    #[error("depth decoration is not a strictly decreasing positive function: {0}")]
    NonMonotoneDecoration(String),
    #[error("unknown tree node {0}")]
    UnknownNode(usize),
    #[error("cycle is not the exceptional transform of an effective divisor")]
    NotExceptionalTransform,
    #[error("generic hyperplane section is not irreducible: no vertex u with Z_f = -E_u*")]
    ReducibleHyperplaneSection,
    #[error("internal cross-check failed: {0}")]
    CrossCheck(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NotATree(_) | Error::ReducibleHyperplaneSection | Error::NotUltrametric(_) => {
                ErrorKind::Hypothesis
            }
            Error::CrossCheck(_) => ErrorKind::CrossCheck,
            _ => ErrorKind::Input,
        }
    }
}
