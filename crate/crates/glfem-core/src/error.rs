//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    InvalidArgument(String),
    /// The mesh does not support the requested operation (e.g. macro
    /// patches on an odd subdivision count).
    UnsupportedMesh(String),
    /// An operation needs the exact solution but the problem does not
    /// carry one.
    MissingExactSolution,
    /// Vector/matrix dimensions do not line up.
    DimensionMismatch { expected: usize, found: usize },
    /// The linear solver broke down or stopped above the requested
    /// tolerance; `residual` is the relative residual actually achieved.
    SolverFailure { residual: f64, iterations: usize },
    /// A solver failure during time stepping, tagged with the step index.
    StepFailure { step: usize, residual: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::UnsupportedMesh(msg) => write!(f, "unsupported mesh: {msg}"),
            Error::MissingExactSolution => {
                write!(f, "operation requires a problem with an exact solution")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::SolverFailure { residual, iterations } => write!(
                f,
                "linear solver failed: relative residual {residual:.3e} after {iterations} iterations"
            ),
            Error::StepFailure { step, residual } => write!(
                f,
                "linear solver failed at time step {step}: relative residual {residual:.3e}"
            ),
        }
    }
}

impl core::error::Error for Error {}
