use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("operator `{0}` is set-valued; no forward evaluation")]
    SetValued(&'static str),

    #[error("length {0} is not a power of two")]
    NonPowerOfTwo(usize),

    #[error("operator is not monotone: symmetric part has eigenvalue {0:e}")]
    NotMonotone(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("reference run did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergedReference { residual: f64, iterations: usize },

    #[error("malformed system: {0}")]
    MalformedSystem(String),

    #[error("infeasible problem parameters: {0}")]
    InfeasibleParams(String),

    #[error("growth measurement needs a nonzero starting point")]
    ZeroStart,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
