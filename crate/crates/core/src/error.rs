use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate integration box")]
    DegenerateBox,

    #[error("element family {family} is not supported in dimension {dim}")]
    UnsupportedElement { family: String, dim: usize },

    #[error("DoF matrix of {family} in dimension {dim} is singular")]
    SingularDofMatrix { family: String, dim: usize },

    #[error("derivative order {0} exceeds 3")]
    DerivativeOrder(u32),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("quadrature with {given} points per axis is below the required {required}")]
    InsufficientQuadrature { given: usize, required: usize },

    #[error("no boundary value supplied for boundary DoF {0}")]
    MissingBoundaryValue(usize),

    #[error("local mass matrix is singular on cell {0}")]
    SingularMassMatrix(usize),

    #[error("sparse Cholesky factorization failed: {0}")]
    Factorization(String),

    #[error("conjugate gradient stopped after {iterations} iterations at relative residual {residual:.3e}; use the direct solver")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("level N={level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical pipeline (factorization, iteration).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Factorization(_) | Error::NotConverged { .. } | Error::SingularMassMatrix(_) => true,
            Error::Level { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
