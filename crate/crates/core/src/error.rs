use thiserror::Error;

use crate::lindblad::LogicalOperators;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: at least 2 Fock levels are required")]
    InvalidDimension { dim: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: expected dimension {expected}, got {found}")]
    Shape { expected: usize, found: usize },

    #[error(
        "matrix exponential overflowed while squaring (operator 1-norm {norm:.3e}); \
         reduce the Fock dimension or epsilon"
    )]
    Overflow { norm: f64 },

    #[error("quadrature grid too small: dropped Gaussian weight {dropped:.3e} exceeds {limit:.0e}")]
    QuadratureGrid { dropped: f64, limit: f64 },

    #[error(
        "kernel gap too small: kernel eigenvalue {kernel:.3e} vs next eigenvalue {next:.3e} \
         (ratio must exceed {required:.0e})"
    )]
    DegenerateGap { kernel: f64, next: f64, required: f64 },

    #[error(
        "step size underflow at t = {t:.6e} (h = {h:.3e}); dominant channel '{channel}' has \
         norm {norm:.3e}"
    )]
    StepUnderflow { t: f64, h: f64, channel: String, norm: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t:.6e}")]
    StepBudget { max_steps: usize, t: f64 },

    #[error("logical operators did not converge: residual {residual:.3e} > tolerance {tol:.1e}")]
    NonConvergence {
        residual: f64,
        tol: f64,
        operators: Box<LogicalOperators>,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
