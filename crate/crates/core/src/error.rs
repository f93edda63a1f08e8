//! Error type shared by all modules.

use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports. Numerical failures are never silent.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("index {0} out of range 0..=3")]
    IndexOutOfRange(usize),
    #[error("argument {0} lies within 1e-12 of the branch cut (-inf, 0]")]
    BranchCutProximity(Complex64),
    #[error("result overflows for argument {0}")]
    Overflow(Complex64),
    #[error("result underflows for argument {0}")]
    Underflow(Complex64),
    #[error("quadrature did not converge: estimated error {est_error:e} after {evaluations} evaluations")]
    NonConvergence { est_error: f64, evaluations: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("separation vector is within {cone_tol:e} of the null cone (square {square:e})")]
    ConeProximity { square: f64, cone_tol: f64 },
    #[error("degenerate argument: {0}")]
    DegenerateArgument(String),
    #[error("degenerate momentum grid: {0}")]
    DegenerateGrid(String),
    #[error("power-law fit needs positive values, got {0:e}")]
    NonPositiveValue(f64),
    #[error("eigenpair residual {residual:e} exceeds tolerance")]
    EigenResidual { residual: f64 },
}
