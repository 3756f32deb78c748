//! Subspaces controlling the degenerate boundary structure.
//!
//! All spaces are cut out of component spaces of form fields by the two
//! linear maps attached to a boundary coframe: wedging with a power of `e`
//! and the fiber bracket `x -> [x, e]`. Intersections of kernels are
//! computed as kernels of stacked operators, which keeps the float mode on
//! one SVD instead of chaining subspace intersections.

use crate::linalg::{LinearOperator, RankPolicy, Subspace};
use crate::scalar::Scalar;

use super::{BoundaryCoframe, CoframeResult};

/// The derived subspaces for one boundary coframe.
///
/// Dimensions depend only on `N` and the signature class; the rank suite
/// checks them against their closed-form counts over many random coframes.
#[derive(Debug)]
pub struct BoundarySpaces {
    /// Kernel of `e^{N-3} ^ .` on (1,2)-forms.
    pub kernel_12: Subspace,
    /// Kernel of `e^{N-3} ^ .` on (2,1)-forms.
    pub kernel_21: Subspace,
    /// Image of `x -> [x, e]` restricted to `kernel_12`, inside (2,1)-forms.
    pub bracket_image: Subspace,
    /// Euclidean orthocomplement of `bracket_image` in (2,1)-forms.
    pub complement: Subspace,
    /// `kernel_21 ∩ complement`: parameter space of the residual boundary
    /// torsion. Zero for nondegenerate metrics, `N(N-3)/2`-dimensional for
    /// lightlike ones.
    pub torsion_space: Subspace,
    /// `kernel_12 ∩ Ker [., e]`: directions along which the bracket map
    /// degenerates. Mirrors `torsion_space` in dimension.
    pub gauge_space: Subspace,
    /// Kernel of `e ^ .` intersected with `Ker [., e_tilde]` on
    /// `(N-3, N-1)`-forms: parameter space of the extra lightlike
    /// constraint multipliers. Same dimension as `torsion_space`.
    pub multiplier_space: Subspace,
}

impl BoundarySpaces {
    /// Builds all spaces for `coframe`. The policy only matters in float
    /// mode; exact mode computes ranks over the rationals.
    pub fn build<S: Scalar>(
        coframe: &BoundaryCoframe<S>,
        policy: &RankPolicy,
    ) -> CoframeResult<Self> {
        let n = coframe.bulk_dimension();

        // The wedge maps on (1,2)- and (2,1)-forms are onto for every
        // coframe, so their float ranks can be pinned to the codomain
        // dimensions regardless of the caller's policy.
        let w12 = coframe.wedge_operator(n - 3, 1, 2)?;
        let w12_policy = RankPolicy::fixed((n - 1) * n);
        let kernel_12 = w12.kernel(&w12_policy)?;

        let w21 = coframe.wedge_operator(n - 3, 2, 1)?;
        let w21_policy = RankPolicy::fixed(n * (n - 1) / 2);
        let kernel_21 = w21.kernel(&w21_policy)?;

        let rho_12 = coframe.bracket_operator(1, 2)?;
        let bracket_image = rho_12.restrict_to(&kernel_12)?.image(policy)?;
        let complement = bracket_image.orthocomplement(policy)?;
        let torsion_space = kernel_21.intersect(&complement, policy)?;

        let gauge_space = LinearOperator::stack(&[&w12, &rho_12])?.kernel(policy)?;

        let w1 = coframe.wedge_operator(1, n - 3, n - 1)?;
        let rho_tilde = coframe.reduced_bracket_operator(n - 3, n - 1)?;
        let multiplier_space = LinearOperator::stack(&[&w1, &rho_tilde])?.kernel(policy)?;

        Ok(Self {
            kernel_12,
            kernel_21,
            bracket_image,
            complement,
            torsion_space,
            gauge_space,
            multiplier_space,
        })
    }

    /// Closed-form dimension of `kernel_12` (equals `kernel_21`'s):
    /// `N(N-1)(N-3)/2` for every coframe.
    pub fn expected_kernel_dim(n: usize) -> usize {
        n * (n - 1) * (n - 3) / 2
    }

    /// Closed-form dimension of `torsion_space`, `gauge_space` and
    /// `multiplier_space` on a lightlike boundary: `N(N-3)/2`. All three
    /// vanish for nondegenerate metrics.
    pub fn expected_degenerate_dim(n: usize) -> usize {
        n * (n - 3) / 2
    }
}
