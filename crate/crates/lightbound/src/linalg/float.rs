//! Floating-point linear-map analysis through the singular value
//! decomposition.
//!
//! Rank decisions follow a fixed policy: singular values below
//! `rel_tol * sigma_max` count as zero, and the cut must be separated by at
//! least a factor `min_gap`, otherwise the kernel is reported as
//! ill-conditioned together with the offending part of the spectrum. For
//! smooth families with a known kernel dimension the policy can instead pin
//! the rank, which keeps projectors and pseudo-inverses continuous across
//! parameter changes.

use nalgebra::{DMatrix, DVector};

use super::{LinalgError, LinalgResult};

/// Rank-decision policy for the float path.
#[derive(Debug, Clone, Copy)]
pub struct RankPolicy {
    /// Singular values below `rel_tol * sigma_max` are treated as zero.
    pub rel_tol: f64,
    /// Minimal ratio between the smallest kept and largest dropped singular
    /// value; below this the rank decision is refused.
    pub min_gap: f64,
    /// Externally known rank; when set, tolerance and gap checks are skipped.
    pub fixed_rank: Option<usize>,
}

impl Default for RankPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            min_gap: 10.0,
            fixed_rank: None,
        }
    }
}

impl RankPolicy {
    pub fn fixed(rank: usize) -> Self {
        Self {
            fixed_rank: Some(rank),
            ..Self::default()
        }
    }
}

/// Cached SVD of a matrix, with rank-policy-aware queries.
pub struct FloatAnalysis {
    matrix: DMatrix<f64>,
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
    singular: DVector<f64>,
}

impl FloatAnalysis {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        // The SVD here is thin; for wide matrices the right singular vectors
        // would not span the kernel. Padding with zero rows to square leaves
        // the singular values unchanged and completes the V factor.
        let svd_input = if matrix.nrows() < matrix.ncols() {
            let mut padded = DMatrix::zeros(matrix.ncols(), matrix.ncols());
            padded
                .view_mut((0, 0), (matrix.nrows(), matrix.ncols()))
                .copy_from(&matrix);
            padded
        } else {
            matrix.clone()
        };
        let svd = svd_input.svd(true, true);
        Self {
            matrix,
            u: svd.u.expect("svd with u requested"),
            v_t: svd.v_t.expect("svd with v_t requested"),
            singular: svd.singular_values,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular
    }

    pub fn rank(&self, policy: &RankPolicy) -> LinalgResult<usize> {
        let count = self.singular.len();
        if let Some(fixed) = policy.fixed_rank {
            return Ok(fixed.min(count));
        }
        let sigma_max = if count == 0 { 0.0 } else { self.singular[0] };
        if sigma_max == 0.0 {
            return Ok(0);
        }
        let threshold = policy.rel_tol * sigma_max;
        let rank = self.singular.iter().filter(|&&s| s > threshold).count();
        if rank < count && rank > 0 {
            let kept = self.singular[rank - 1];
            let dropped = self.singular[rank];
            if dropped > 0.0 && kept / dropped < policy.min_gap {
                return Err(LinalgError::IllConditionedKernel {
                    sigma_kept: kept,
                    sigma_dropped: dropped,
                });
            }
        }
        Ok(rank)
    }

    /// Orthonormal kernel basis as matrix columns for the given rank.
    pub fn kernel_basis(&self, rank: usize) -> DMatrix<f64> {
        let cols = self.matrix.ncols();
        let dim = cols - rank;
        let mut basis = DMatrix::zeros(cols, dim);
        for k in 0..dim {
            for c in 0..cols {
                basis[(c, k)] = self.v_t[(rank + k, c)];
            }
        }
        basis
    }

    /// Orthonormal image basis as matrix columns for the given rank.
    pub fn image_basis(&self, rank: usize) -> DMatrix<f64> {
        let rows = self.matrix.nrows();
        let mut basis = DMatrix::zeros(rows, rank);
        for k in 0..rank {
            for r in 0..rows {
                basis[(r, k)] = self.u[(r, k)];
            }
        }
        basis
    }

    /// Minimum-norm least-squares solution truncated at `rank`, together
    /// with the residual norm `|A x - b|`.
    pub fn solve_min_norm(&self, b: &DVector<f64>, rank: usize) -> (DVector<f64>, f64) {
        let mut x = DVector::zeros(self.matrix.ncols());
        for k in 0..rank {
            let mut coeff = 0.0;
            for r in 0..self.matrix.nrows() {
                coeff += self.u[(r, k)] * b[r];
            }
            coeff /= self.singular[k];
            for c in 0..self.matrix.ncols() {
                x[c] += coeff * self.v_t[(k, c)];
            }
        }
        let residual = (&self.matrix * &x - b).norm();
        (x, residual)
    }
}
