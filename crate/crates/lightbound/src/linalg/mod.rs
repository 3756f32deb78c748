//! Exact and floating-point analysis of linear maps between form component
//! spaces.
//!
//! Everything is mode-tagged: the exact path works over arbitrary-precision
//! rationals and certifies ranks and kernels by fraction-free elimination;
//! the float path works through the SVD under an explicit [`RankPolicy`].
//! Mixing modes is an error rather than a silent conversion.

mod dense;
mod float;
mod modular;
mod operator;
mod rational;
mod subspace;

pub use dense::{dense_determinant, dense_inverse, dense_mul, dense_rank, dense_transpose};
pub use float::{FloatAnalysis, RankPolicy};
pub use modular::{certified_full_rank, modular_rank};
pub use operator::LinearOperator;
pub use rational::ExactElimination;
pub use subspace::Subspace;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("operands mix exact and float modes")]
    ModeMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "ill-conditioned kernel: singular values {sigma_kept:.3e} / {sigma_dropped:.3e} \
         do not separate cleanly"
    )]
    IllConditionedKernel { sigma_kept: f64, sigma_dropped: f64 },
    #[error("right-hand side is not in the image{}", residual.map(|r| format!(" (residual {r:.3e})")).unwrap_or_default())]
    NotInImage { residual: Option<f64> },
    #[error("basis map failed: {0}")]
    MapFailed(String),
    #[error("operator carries no degree metadata")]
    MissingDegrees,
    #[error("cannot stack an empty list of operators")]
    EmptyStack,
}

pub type LinalgResult<T> = Result<T, LinalgError>;
