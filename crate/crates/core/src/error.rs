use thiserror::Error;

/// Errors raised by model construction, realizability checks and the filter solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "matrix is not Hurwitz (largest eigenvalue real part {max_real:.3e}); no steady state"
    )]
    NotHurwitz { max_real: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),

    #[error(
        "Riccati solver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    Convergence { iterations: usize, residual: f64 },

    #[error("Schur iteration did not converge: {0}")]
    Eigen(String),

    #[error("oracle integration unstable at t = {time:.4} with step {step:e}")]
    StepSize { time: f64, step: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("physical realizability contract violated: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
