use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("action is not a member of the action set (hull residual {residual:.3e})")]
    NotMember { residual: f64 },

    #[error("belief polytope is empty")]
    EmptyPolytope,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("prior is not undecided: the optimal face is a single action")]
    NotUndecided,

    #[error("prior is not flexible (regime {0})")]
    NotFlexible(String),

    #[error("prior is too close to the simplex boundary for step {step}")]
    BoundaryPrior { step: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("negative indemnity {0}")]
    NegativeIndemnity(f64),

    #[error("failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("theta {theta} too large: posteriors leave the simplex interior")]
    ThetaTooLarge { theta: f64 },

    #[error("quadrature Bayes residual {0:.3e} exceeds tolerance")]
    QuadratureResidual(f64),

    #[error("degenerate theta grid: {0}")]
    DegenerateGrid(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
