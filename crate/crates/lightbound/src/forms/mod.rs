//! Graded algebra of vector-valued differential forms.
//!
//! A field of degree `(i, j)` is an `i`-form on a base of dimension
//! `base_dim` with values in the `j`-th wedge power of an internal Minkowski
//! space of dimension `fiber_dim` (metric `diag(+,...,+,-)`, the last fiber
//! direction timelike). Coefficients are stored on strictly increasing
//! multi-indices for both the base and the fiber factor.
//!
//! The operations exposed here are the pointwise ones:
//!
//! * [`FormField::wedge`] — the graded product; antisymmetrisation is
//!   absorbed into the basis convention, so `wedge` of basis monomials is a
//!   signed basis monomial with unit coefficient,
//! * [`FormField::lie_action`] — the internal so(fiber) action of a
//!   bivector-valued form on any form, a derivation over fiber slots,
//! * [`FormField::rho_action`] — contraction of the last fiber slot with a
//!   coframe, the degree `(+1, -1)` map written `[., e]`,
//! * [`FormField::contract`] — the interior product with a base vector.
//!
//! Exterior derivatives live in the lattice layer, where a discretisation is
//! available.

mod degree;
mod field;
mod index;

pub use degree::FormDegree;
pub use field::FormField;
pub use index::{binomial, merge_sign, merged, sort_signed, subset_rank, subset_unrank};

use thiserror::Error;

/// Sign of the internal Minkowski metric `diag(+,...,+,-)` on fiber
/// direction `a` (zero-based; the last direction is timelike).
pub fn eta_sign(a: u8, fiber_dim: usize) -> i8 {
    if usize::from(a) + 1 == fiber_dim {
        -1
    } else {
        1
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: FormDegree, got: FormDegree },
    #[error("incompatible spaces: {left} vs {right}")]
    SpaceMismatch { left: FormDegree, right: FormDegree },
    #[error("multi-index {index:?} out of range for {degree}")]
    IndexOutOfRange { degree: FormDegree, index: Vec<u8> },
    #[error("operand must be fiber-bivector valued, got {got}")]
    NotBivector { got: FormDegree },
    #[error("operand must be a coframe (one-form with one fiber slot), got {got}")]
    NotCoframe { got: FormDegree },
    #[error("operand has no fiber slot to contract, got {got}")]
    NoFiberSlot { got: FormDegree },
    #[error("top coefficient requested for non-top degree {got}")]
    NotTop { got: FormDegree },
    #[error("vector has {got} components, base dimension is {expected}")]
    VectorLength { expected: usize, got: usize },
}

pub type FormResult<T> = Result<T, FormError>;
