use thiserror::Error;

use crate::poisson::SolverStats;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    DerivativeOrder(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dry node at x index {index}: water column height {depth}")]
    DryNode { index: usize, depth: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("pressure solver exceeded {} iterations (residual {:.3e})", .0.iterations, .0.final_residual())]
    MaxIterations(Box<SolverStats>),

    #[error("pressure solver stagnated after {} iterations (residual {:.3e})", .0.iterations, .0.final_residual())]
    Stagnation(Box<SolverStats>),

    #[error("divergence {divergence:.3e} above projection tolerance {tolerance:.3e} at stage {stage}")]
    Divergence {
        stage: usize,
        divergence: f64,
        tolerance: f64,
    },

    #[error("simulation became unstable at t = {time}")]
    Unstable { time: f64 },
}
