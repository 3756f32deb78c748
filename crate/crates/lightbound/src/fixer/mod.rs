//! Unique decomposition fixing a connection representative on the boundary.
//!
//! An input `(N-2, N-2)`-form `beta` splits uniquely as
//!
//! ```text
//! beta = e^{N-3} gamma + e_n e^{N-4} [v, e] + e_n e^{N-4} theta
//! ```
//!
//! with `gamma` a (1,1)-form, `v` in the kernel of the (1,2) wedge map and
//! Euclidean-orthogonal to the gauge space, and `theta` in the torsion
//! space. On nondegenerate boundaries the gauge and torsion spaces are
//! zero, `theta` vanishes, and the split reduces to its first two terms.
//!
//! Applied to `beta = e_n e^{N-4} d_omega e`, subtracting the `v`-part from
//! the connection and projecting out its gauge-space component yields the
//! fixed representative: the connection for which the structural constraint
//! `e_n e^{N-4} d_omega e - e_n e^{N-4} theta` lands in the image of the
//! (1,1) wedge map, with `theta` the torsion obstruction. The result
//! depends only on the kernel-equivalence class of the input connection.

use num::rational::BigRational;
use thiserror::Error;

use crate::coframe::spaces::BoundarySpaces;
use crate::coframe::{subspace_fields, BoundaryCoframe, CoframeError};
use crate::forms::{FormDegree, FormError, FormField};
use crate::linalg::{
    ExactElimination, FloatAnalysis, LinalgError, LinearOperator, RankPolicy, Subspace,
};
use crate::scalar::Scalar;


/// Relative tolerance on the reconstruction residual in float mode; the
/// decomposition is exact in theory, so larger defects flag an operator
/// bug rather than roundoff.
const DECOMPOSE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FixerError {
    #[error("decomposition system is not uniquely solvable (kernel dimension {kernel_dim})")]
    NotUnique { kernel_dim: usize },
    #[error("decomposition failed: reconstruction residual {residual:.3e}")]
    DecompositionFailed { residual: f64 },
    #[error("expected a form of degree {expected}, got {got}")]
    DegreeMismatch { expected: FormDegree, got: FormDegree },
    #[error(transparent)]
    Coframe(#[from] CoframeError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type FixerResult<T> = Result<T, FixerError>;

/// The three parts of a decomposed `(N-2, N-2)`-form.
#[derive(Debug, Clone)]
pub struct Decomposition<S: Scalar> {
    pub gamma: FormField<S>,
    pub v: FormField<S>,
    pub theta: FormField<S>,
    /// Sup-norm reconstruction defect; exactly zero in exact mode.
    pub residual: f64,
}

/// A fixed connection representative with its audit trail.
#[derive(Debug, Clone)]
pub struct DecompositionResult<S: Scalar> {
    /// The fixed representative `omega = omega_tilde - v - p_K omega_tilde`.
    pub omega: FormField<S>,
    /// Kernel part removed from the input connection.
    pub v: FormField<S>,
    /// Coefficient of the wedge-image part of the structural term.
    pub gamma: FormField<S>,
    /// Torsion obstruction; zero for nondegenerate boundaries.
    pub theta: FormField<S>,
    /// Named residuals: reconstruction, structural constraint, gauge
    /// projector. All bounded by tolerance; exactly zero in exact mode.
    pub residuals: Vec<(String, f64)>,
}

/// Solver for the decomposition attached to one coframe.
pub struct RepresentativeFixer<S: Scalar> {
    n: usize,
    e: FormField<S>,
    /// `e_n ^ e^{N-4}` as a form field, the prefix of the last two blocks.
    transversal_block: FormField<S>,
    gamma_degree: FormDegree,
    beta_degree: FormDegree,
    omega_degree: FormDegree,
    v_basis: Vec<FormField<S>>,
    theta_basis: Vec<FormField<S>>,
    gauge_space: Subspace,
    kernel_dim: usize,
    exact_solver: Option<ExactElimination>,
    float_solver: Option<(FloatAnalysis, usize)>,
}

impl<S: Scalar> RepresentativeFixer<S> {
    /// Assembles and rank-checks the decomposition system for `coframe`.
    pub fn new(coframe: &BoundaryCoframe<S>, policy: &RankPolicy) -> FixerResult<Self> {
        let spaces = BoundarySpaces::build(coframe, policy)?;
        Self::with_spaces(coframe, &spaces, policy)
    }

    /// Variant reusing already-computed subspaces.
    pub fn with_spaces(
        coframe: &BoundaryCoframe<S>,
        spaces: &BoundarySpaces,
        policy: &RankPolicy,
    ) -> FixerResult<Self> {
        let n = coframe.bulk_dimension();
        let e = coframe.coframe().clone();
        let omega_degree = FormDegree::new(n - 1, n, 1, 2);
        let gamma_degree = FormDegree::new(n - 1, n, 1, 1);
        let beta_degree = FormDegree::new(n - 1, n, n - 2, n - 2);
        let theta_degree = FormDegree::new(n - 1, n, 2, 1);

        // v ranges over the gauge-orthogonal slice of the wedge kernel, so
        // the decomposition is unique rather than unique-mod-gauge.
        let complement = spaces.gauge_space.orthocomplement(policy)?;
        let v_space = spaces.kernel_12.intersect(&complement, policy)?;
        let v_basis = subspace_fields::<S>(&v_space, omega_degree)?;
        let theta_basis = subspace_fields::<S>(&spaces.torsion_space, theta_degree)?;
        let gauge_space = spaces.gauge_space.clone();

        let e_pow = e.wedge_power(n.saturating_sub(4))?;
        let transversal_block = coframe.transversal().wedge(&e_pow)?;
        let e_wedge = e.wedge_power(n - 3)?;

        // Column order: gamma components, v coordinates, theta coordinates.
        let mut columns: Vec<Vec<S>> = Vec::new();
        for flat in 0..gamma_degree.components() {
            let basis = FormField::<S>::basis(gamma_degree, flat);
            columns.push(basis.wedge(&e_wedge)?.coeffs().to_vec());
        }
        for v in &v_basis {
            let bracket = v.rho_action(&e)?;
            columns.push(transversal_block.wedge(&bracket)?.coeffs().to_vec());
        }
        for t in &theta_basis {
            columns.push(transversal_block.wedge(t)?.coeffs().to_vec());
        }

        let rows = beta_degree.components();
        let cols = columns.len();
        let (kernel_dim, exact_solver, float_solver) = if S::EXACT {
            let matrix: Vec<Vec<BigRational>> = (0..rows)
                .map(|r| {
                    columns
                        .iter()
                        .map(|c| c[r].to_exact().expect("exact scalar"))
                        .collect()
                })
                .collect();
            let solver = ExactElimination::with_solver(&matrix, cols);
            (cols - solver.rank(), Some(solver), None)
        } else {
            let matrix =
                nalgebra::DMatrix::from_fn(rows, cols, |r, c| columns[c][r].to_f64());
            let analysis = FloatAnalysis::new(matrix);
            let rank = analysis.rank(policy)?;
            (cols - rank, None, Some((analysis, rank)))
        };

        Ok(Self {
            n,
            e,
            transversal_block,
            gamma_degree,
            beta_degree,
            omega_degree,
            v_basis,
            theta_basis,
            gauge_space,
            kernel_dim,
            exact_solver,
            float_solver,
        })
    }

    /// Dimension of the kernel of the assembled system; zero certifies
    /// uniqueness of the decomposition.
    pub fn system_kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    pub fn v_parameter_count(&self) -> usize {
        self.v_basis.len()
    }

    pub fn theta_parameter_count(&self) -> usize {
        self.theta_basis.len()
    }

    /// Basis of the gauge-orthogonal slice of the wedge kernel that the
    /// `v`-part ranges over.
    pub fn v_basis(&self) -> &[FormField<S>] {
        &self.v_basis
    }

    /// Basis of the torsion space that the `theta`-part ranges over.
    pub fn theta_basis(&self) -> &[FormField<S>] {
        &self.theta_basis
    }

    /// Splits `beta` into its three parts.
    pub fn decompose(&self, beta: &FormField<S>) -> FixerResult<Decomposition<S>> {
        if beta.degree() != self.beta_degree {
            return Err(FixerError::DegreeMismatch {
                expected: self.beta_degree,
                got: beta.degree(),
            });
        }
        if self.kernel_dim != 0 {
            return Err(FixerError::NotUnique {
                kernel_dim: self.kernel_dim,
            });
        }
        let solution: Vec<S> = if let Some(solver) = &self.exact_solver {
            let rhs: Vec<BigRational> = beta
                .coeffs()
                .iter()
                .map(|x| x.to_exact().expect("exact scalar"))
                .collect();
            let coeffs = solver.solve(&rhs).ok_or(FixerError::DecompositionFailed {
                residual: f64::INFINITY,
            })?;
            coeffs.into_iter().map(S::from_exact).collect()
        } else {
            let (analysis, rank) = self.float_solver.as_ref().expect("float mode");
            let rhs = nalgebra::DVector::from_fn(beta.coeffs().len(), |r, _| {
                beta.coeffs()[r].to_f64()
            });
            let (solution, residual) = analysis.solve_min_norm(&rhs, *rank);
            let scale = rhs.norm().max(1.0);
            if residual > DECOMPOSE_TOL * scale {
                return Err(FixerError::DecompositionFailed { residual });
            }
            solution.iter().map(|x| S::from_f64_exact(*x)).collect()
        };

        let gamma_count = self.gamma_degree.components();
        let gamma = FormField::from_coeffs(
            self.gamma_degree,
            solution[..gamma_count].to_vec(),
        )?;
        let mut v = FormField::zero(self.omega_degree);
        for (coeff, basis) in solution[gamma_count..gamma_count + self.v_basis.len()]
            .iter()
            .zip(&self.v_basis)
        {
            v = v.add(&basis.scale(coeff))?;
        }
        let mut theta = FormField::zero(FormDegree::new(self.n - 1, self.n, 2, 1));
        for (coeff, basis) in solution[gamma_count + self.v_basis.len()..]
            .iter()
            .zip(&self.theta_basis)
        {
            theta = theta.add(&basis.scale(coeff))?;
        }

        let rebuilt = self.assemble(&gamma, &v, &theta)?;
        let residual = beta.sub(&rebuilt)?.sup_norm();
        debug_assert!(!S::EXACT || residual == 0.0);
        Ok(Decomposition {
            gamma,
            v,
            theta,
            residual,
        })
    }

    /// Evaluates `e^{N-3} gamma + e_n e^{N-4} [v, e] + e_n e^{N-4} theta`.
    pub fn assemble(
        &self,
        gamma: &FormField<S>,
        v: &FormField<S>,
        theta: &FormField<S>,
    ) -> FixerResult<FormField<S>> {
        let e_wedge = self.e.wedge_power(self.n - 3)?;
        let mut out = gamma.wedge(&e_wedge)?;
        out = out.add(&self.transversal_block.wedge(&v.rho_action(&self.e)?)?)?;
        out = out.add(&self.transversal_block.wedge(theta)?)?;
        Ok(out)
    }

    /// Euclidean projection of a (1,2)-form onto the gauge space.
    pub fn project_gauge(&self, omega: &FormField<S>) -> FixerResult<FormField<S>> {
        if self.gauge_space.dim() == 0 {
            return Ok(FormField::zero(self.omega_degree));
        }
        let coeffs: Vec<S> = if S::EXACT {
            let v: Vec<BigRational> = omega
                .coeffs()
                .iter()
                .map(|x| x.to_exact().expect("exact scalar"))
                .collect();
            self.gauge_space
                .project_exact(&v)?
                .into_iter()
                .map(S::from_exact)
                .collect()
        } else {
            let v: Vec<f64> = omega.coeffs().iter().map(|x| x.to_f64()).collect();
            self.gauge_space
                .project_float(&v)?
                .into_iter()
                .map(S::from_f64_exact)
                .collect()
        };
        Ok(FormField::from_coeffs(self.omega_degree, coeffs)?)
    }

    /// Fixes the representative of `omega_tilde`: removes its kernel part
    /// as dictated by the structural constraint and projects out the gauge
    /// component. `exterior_part` supplies the derivative term of
    /// `d_omega e` (zero in the purely pointwise model).
    pub fn fix(
        &self,
        omega_tilde: &FormField<S>,
        exterior_part: &FormField<S>,
    ) -> FixerResult<DecompositionResult<S>> {
        if omega_tilde.degree() != self.omega_degree {
            return Err(FixerError::DegreeMismatch {
                expected: self.omega_degree,
                got: omega_tilde.degree(),
            });
        }
        let torsion = exterior_part.add(&omega_tilde.rho_action(&self.e)?)?;
        let beta = self.transversal_block.wedge(&torsion)?;
        let parts = self.decompose(&beta)?;

        let gauge_part = self.project_gauge(omega_tilde)?;
        let omega = omega_tilde.sub(&parts.v)?.sub(&gauge_part)?;

        // Structural constraint on the fixed representative:
        // e_n e^{N-4} d_omega e = e^{N-3} gamma + e_n e^{N-4} theta.
        let fixed_torsion = exterior_part.add(&omega.rho_action(&self.e)?)?;
        let lhs = self.transversal_block.wedge(&fixed_torsion)?;
        let zero_v = FormField::zero(self.omega_degree);
        let rhs = self.assemble(&parts.gamma, &zero_v, &parts.theta)?;
        let structural = lhs.sub(&rhs)?.sup_norm();

        let gauge_residual = self.project_gauge(&omega)?.sup_norm();

        let residuals = vec![
            ("reconstruction".to_string(), parts.residual),
            ("structural".to_string(), structural),
            ("gauge_projection".to_string(), gauge_residual),
        ];
        Ok(DecompositionResult {
            omega,
            v: parts.v,
            gamma: parts.gamma,
            theta: parts.theta,
            residuals,
        })
    }
}

/// Kernel dimension of the joint linear system expressing that a (2,1)-form
/// `alpha` wedge-annihilates with `e^{N-3}`, has zero torsion-space part,
/// and lands (after the transversal-block wedge) in the image of the (1,1)
/// wedge map. Zero certifies that those three conditions force the full
/// covariant torsion to vanish.
pub fn flatness_kernel_dim<S: Scalar>(
    coframe: &BoundaryCoframe<S>,
    spaces: &BoundarySpaces,
    policy: &RankPolicy,
) -> FixerResult<usize> {
    let n = coframe.bulk_dimension();
    let alpha_degree = FormDegree::new(n - 1, n, 2, 1);
    let e_pow = coframe.coframe().wedge_power(n.saturating_sub(4))?;
    let transversal_block = coframe.transversal().wedge(&e_pow)?;

    let wedge_21 = coframe.wedge_operator(n - 3, 2, 1)?;
    let image_11 = coframe.wedge_operator(n - 3, 1, 1)?.image(policy)?;

    let dim = alpha_degree.components();
    let torsion = &spaces.torsion_space;

    // Column images of the torsion projector and of the image-complement
    // composition, assembled basis vector by basis vector.
    let stacked = if S::EXACT {
        let block = transversal_block.map_to::<BigRational>();
        let mut torsion_cols: Vec<Vec<BigRational>> = Vec::with_capacity(dim);
        let mut wedge_cols: Vec<Vec<BigRational>> = Vec::with_capacity(dim);
        for flat in 0..dim {
            let basis = FormField::<BigRational>::basis(alpha_degree, flat);
            let coords: Vec<BigRational> = basis.coeffs().to_vec();
            torsion_cols.push(if torsion.dim() == 0 {
                vec![BigRational::from_integer(0.into()); dim]
            } else {
                torsion.project_exact(&coords)?
            });
            let wedged = block.wedge(&basis)?;
            let image_part = if image_11.dim() == 0 {
                vec![BigRational::from_integer(0.into()); wedged.coeffs().len()]
            } else {
                image_11.project_exact(wedged.coeffs())?
            };
            wedge_cols.push(
                wedged
                    .coeffs()
                    .iter()
                    .zip(&image_part)
                    .map(|(a, b)| a - b)
                    .collect(),
            );
        }
        let torsion_rows = transpose_columns(&torsion_cols, dim);
        let beta_rows = wedge_cols.first().map_or(0, Vec::len);
        let wedge_rows = transpose_columns(&wedge_cols, beta_rows);
        let p_t = LinearOperator::from_exact_rows(torsion_rows, dim);
        let p_perp = LinearOperator::from_exact_rows(wedge_rows, dim);
        LinearOperator::stack(&[&wedge_21, &p_t, &p_perp])?
    } else {
        let beta_rows = transversal_block
            .degree()
            .wedge(&alpha_degree)
            .components();
        let block = transversal_block.map_to::<f64>();
        let mut p_t = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        let mut p_perp = nalgebra::DMatrix::<f64>::zeros(beta_rows, dim);
        for flat in 0..dim {
            let basis = FormField::<f64>::basis(alpha_degree, flat);
            if torsion.dim() > 0 {
                let proj = torsion.project_float(basis.coeffs())?;
                for (r, value) in proj.iter().enumerate() {
                    p_t[(r, flat)] = *value;
                }
            }
            let wedged = block.wedge(&basis)?;
            let image_part = if image_11.dim() == 0 {
                vec![0.0; beta_rows]
            } else {
                image_11.project_float(wedged.coeffs())?
            };
            for r in 0..beta_rows {
                p_perp[(r, flat)] = wedged.coeffs()[r] - image_part[r];
            }
        }
        let p_t = LinearOperator::from_float_matrix(p_t);
        let p_perp = LinearOperator::from_float_matrix(p_perp);
        LinearOperator::stack(&[&wedge_21, &p_t, &p_perp])?
    };
    Ok(stacked.kernel(policy)?.dim())
}

/// Reshapes column vectors into row-major form.
fn transpose_columns(cols: &[Vec<BigRational>], rows: usize) -> Vec<Vec<BigRational>> {
    (0..rows)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect()
}
