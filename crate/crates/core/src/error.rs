use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operation requires a {expected} family")]
    WrongKind { expected: &'static str },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("discriminant d^2 + 4g vanishes at the evaluation point (|disc| = {0:e})")]
    DegenerateDiscriminant(f64),

    #[error("g vanishes at every candidate root")]
    DegenerateG,

    #[error("root lattice is empty")]
    NoRootsFound,

    #[error("zero polynomial has no roots")]
    ZeroPolynomial,

    #[error("g is a positive constant; no orthogonality weight exists")]
    PositiveG,

    #[error("g is not constant")]
    NonConstantG,

    #[error("d(x) = ±2√G has no real solution bracketing a support interval")]
    NoRealSupport,

    #[error("d' changes sign inside the support [{0}, {1}]")]
    NonMonotoneD(f64, f64),

    #[error("generator axiom violated: {0}")]
    GeneratorAxiomViolation(String),

    #[error("spectral support [{lo}, {hi}] leaves the admissible interval {allowed}")]
    SupportViolation { lo: f64, hi: f64, allowed: &'static str },

    #[error("truncation of size {size} is too small for {steps} steps from state {state}")]
    TruncationTooSmall { size: usize, steps: usize, state: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Whether the error reports a violated precondition rather than an
    /// internal numerical failure.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}
