use alloc::string::String;

/// Errors raised by the numerical and simulation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric failure in {what}: residual {residual:e}")]
    Numeric { what: &'static str, residual: f64 },
    #[error("no sign change found while bracketing ({0})")]
    Bracket(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("tail truncation point could not be established: {0}")]
    Truncation(String),
    #[error("quadrature did not reach requested accuracy (estimate {estimate:e}, target {target:e})")]
    Accuracy { estimate: f64, target: f64 },
    #[error("energy conditions not satisfied: {0}")]
    Conditions(String),
    #[error("degenerate saddle point: {0}")]
    DegenerateSaddle(String),
    #[error("time step {dt} exceeds stability limit {limit}")]
    Stability { dt: f64, limit: f64 },
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = core::result::Result<T, Error>;
