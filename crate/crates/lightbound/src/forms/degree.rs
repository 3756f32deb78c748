//! Degree bookkeeping for vector-valued forms.

use std::fmt;

use super::index::binomial;

/// Degree of a vector-valued form: a `form`-form on a `base_dim`-dimensional
/// base, valued in the `internal`-th wedge power of a `fiber_dim`-dimensional
/// fiber.
///
/// Degrees with `form > base_dim` or `internal > fiber_dim` are permitted and
/// simply have no components; they arise as wedge products that vanish for
/// degree reasons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FormDegree {
    pub base_dim: usize,
    pub fiber_dim: usize,
    pub form: usize,
    pub internal: usize,
}

impl FormDegree {
    pub fn new(base_dim: usize, fiber_dim: usize, form: usize, internal: usize) -> Self {
        Self {
            base_dim,
            fiber_dim,
            form,
            internal,
        }
    }

    /// Number of independent base multi-indices.
    pub fn base_count(&self) -> usize {
        binomial(self.base_dim, self.form)
    }

    /// Number of independent fiber multi-indices.
    pub fn fiber_count(&self) -> usize {
        binomial(self.fiber_dim, self.internal)
    }

    /// Total number of stored components.
    pub fn components(&self) -> usize {
        self.base_count() * self.fiber_count()
    }

    /// Total degree `form + internal`, which governs graded commutativity of
    /// the wedge product.
    pub fn total(&self) -> usize {
        self.form + self.internal
    }

    /// Whether two degrees live over the same base and fiber.
    pub fn same_spaces(&self, other: &Self) -> bool {
        self.base_dim == other.base_dim && self.fiber_dim == other.fiber_dim
    }

    /// Degree of a wedge product of the two operands.
    pub fn wedge(&self, other: &Self) -> Self {
        Self {
            base_dim: self.base_dim,
            fiber_dim: self.fiber_dim,
            form: self.form + other.form,
            internal: self.internal + other.internal,
        }
    }

    /// Whether this is the top degree in both the base and fiber factors, so
    /// the field is a single volume coefficient.
    pub fn is_top(&self) -> bool {
        self.form == self.base_dim && self.internal == self.fiber_dim
    }

    /// Flat component rank of a `(base multi-index, fiber multi-index)` pair.
    pub fn flat(&self, base_rank: usize, fiber_rank: usize) -> usize {
        base_rank * self.fiber_count() + fiber_rank
    }
}

impl fmt::Display for FormDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Omega^({},{}) over base dim {} fiber dim {}",
            self.form, self.internal, self.base_dim, self.fiber_dim
        )
    }
}
