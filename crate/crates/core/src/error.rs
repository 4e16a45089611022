use thiserror::Error;

/// Errors raised by the pricing engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator X -> AX + XA^T is singular: {0}")]
    SingularOperator(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("argument outside the moment strip: {0}")]
    OutOfStrip(String),

    #[error("branch cut hit: {0}")]
    Branch(String),

    #[error("unsupported sampling: {0}")]
    UnsupportedSampling(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("martingale drift infeasible: {0}")]
    MartingaleInfeasible(String),

    #[error("closed form not applicable: {0}")]
    WrongBranch(String),

    #[error("degenerate coefficient: {0}")]
    DegenerateCoefficient(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("damping vector not admissible: {0}")]
    Damping(String),

    #[error("price violates no-arbitrage bounds: {0}")]
    Arbitrage(String),

    #[error("calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("invalid parameter: {0}")]
    Validation(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
