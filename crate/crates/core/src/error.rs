use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error(
        "presentation has {found} relators for {gens} generators (deficiency one needs {expected})"
    )]
    RelatorCount {
        gens: usize,
        found: usize,
        expected: usize,
    },

    #[error("inconsistent relators: {0}")]
    InconsistentWeights(String),

    #[error("relator {index} has {len} letters (limit {limit})")]
    RelatorTooLong {
        index: usize,
        len: usize,
        limit: usize,
    },

    #[error("singular image matrix for generator {0}")]
    SingularImage(usize),

    #[error("exact division failed: nonzero remainder")]
    InexactDivision,

    #[error("invalid root specification `{0}`")]
    BadRoot(String),

    #[error("invalid eigenvalue data: {0}")]
    BadEigenvalues(String),

    #[error("jet orders differ ({0} vs {1})")]
    JetOrderMismatch(usize, usize),

    #[error("jet is not invertible (zero constant term)")]
    JetNotInvertible,

    #[error("jet exponential needs a vanishing constant term")]
    JetExpConstantTerm,

    #[error("relator residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotARepresentation { residual: f64, tol: f64 },

    #[error("hypotheses of the triangular construction fail: {0}")]
    HypothesisFailure(String),

    #[error("stratum {distance} system is not solvable (residual {residual:.3e})")]
    StratumUnsolvable { distance: usize, residual: f64 },

    #[error("least-squares expansion residual {0:.3e} too large")]
    CoordinateResidual(f64),

    #[error("refinement did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("unsupported torus weight pattern: {0}")]
    WeightPattern(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown knot `{0}`")]
    UnknownKnot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
