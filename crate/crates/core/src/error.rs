use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    InvalidParameter(&'static str),
    #[error("degenerate parameters: {0}")]
    Degenerate(&'static str),
    #[error("Hilbert space dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: u128, cap: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("step size collapsed below {min_step:e} with gradient norm {residual:e}")]
    StepCollapse { min_step: f64, residual: f64 },
    #[error("purity projection failed, defect {defect:e}")]
    PurityProjection { defect: f64 },
    #[error("no crossing in the sampled range")]
    NoCrossing,
    #[error("query {x} outside [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn precondition(msg: &str) -> Error {
    Error::Precondition(String::from(msg))
}
