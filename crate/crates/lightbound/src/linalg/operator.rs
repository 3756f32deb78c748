//! Linear operators between component spaces of vector-valued forms.
//!
//! An operator is mode-tagged: either exact (rational entries, analysed by
//! fraction-free elimination) or float (analysed through the SVD with a rank
//! policy). Operators built from the same scalar type as the surrounding
//! computation keep degree metadata, so they can be applied directly to
//! form fields.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num::{BigRational, Zero};

use super::float::{FloatAnalysis, RankPolicy};
use super::rational::ExactElimination;
use super::subspace::Subspace;
use super::{LinalgError, LinalgResult, Mode};
use crate::forms::{FormDegree, FormField};
use crate::scalar::Scalar;

enum OpStore {
    /// Row-major rational rows.
    Exact(Vec<Vec<BigRational>>),
    Float(DMatrix<f64>),
}

pub struct LinearOperator {
    rows: usize,
    cols: usize,
    domain: Option<FormDegree>,
    codomain: Option<FormDegree>,
    store: OpStore,
    exact_cache: OnceLock<ExactElimination>,
    exact_solver_cache: OnceLock<ExactElimination>,
    /// Result of the cheap modular full-rank certificate, tried before any
    /// exact elimination.
    full_rank_cert: OnceLock<Option<usize>>,
    float_cache: OnceLock<FloatAnalysis>,
}

impl LinearOperator {
    fn new(rows: usize, cols: usize, store: OpStore) -> Self {
        Self {
            rows,
            cols,
            domain: None,
            codomain: None,
            store,
            exact_cache: OnceLock::new(),
            exact_solver_cache: OnceLock::new(),
            full_rank_cert: OnceLock::new(),
            float_cache: OnceLock::new(),
        }
    }

    pub fn from_exact_rows(rows: Vec<Vec<BigRational>>, cols: usize) -> Self {
        let nrows = rows.len();
        debug_assert!(rows.iter().all(|r| r.len() == cols));
        Self::new(nrows, cols, OpStore::Exact(rows))
    }

    pub fn from_float_matrix(matrix: DMatrix<f64>) -> Self {
        let (rows, cols) = (matrix.nrows(), matrix.ncols());
        Self::new(rows, cols, OpStore::Float(matrix))
    }

    /// Builds the matrix of a map between form component spaces by applying
    /// it to every basis monomial of the domain. The mode follows the scalar
    /// type.
    pub fn from_basis_map<S, F>(
        domain: FormDegree,
        codomain: FormDegree,
        map: F,
    ) -> LinalgResult<Self>
    where
        S: Scalar,
        F: Fn(&FormField<S>) -> Result<FormField<S>, crate::forms::FormError>,
    {
        let (rows, cols) = (codomain.components(), domain.components());
        let mut columns: Vec<Vec<S>> = Vec::with_capacity(cols);
        for flat in 0..cols {
            let image = map(&FormField::basis(domain, flat))
                .map_err(|e| LinalgError::MapFailed(e.to_string()))?;
            if image.degree() != codomain {
                return Err(LinalgError::MapFailed(format!(
                    "basis map produced degree {}, expected {}",
                    image.degree(),
                    codomain
                )));
            }
            columns.push(image.into_coeffs());
        }
        let mut op = if S::EXACT {
            let rows_data: Vec<Vec<BigRational>> = (0..rows)
                .map(|r| {
                    columns
                        .iter()
                        .map(|col| col[r].to_exact().expect("exact scalar"))
                        .collect()
                })
                .collect();
            Self::new(rows, cols, OpStore::Exact(rows_data))
        } else {
            let matrix = DMatrix::from_fn(rows, cols, |r, c| columns[c][r].to_f64());
            Self::new(rows, cols, OpStore::Float(matrix))
        };
        op.domain = Some(domain);
        op.codomain = Some(codomain);
        Ok(op)
    }

    pub fn mode(&self) -> Mode {
        match &self.store {
            OpStore::Exact(_) => Mode::Exact,
            OpStore::Float(_) => Mode::Float,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain_degree(&self) -> Option<FormDegree> {
        self.domain
    }

    pub fn codomain_degree(&self) -> Option<FormDegree> {
        self.codomain
    }

    fn exact_rows(&self) -> LinalgResult<&Vec<Vec<BigRational>>> {
        match &self.store {
            OpStore::Exact(rows) => Ok(rows),
            OpStore::Float(_) => Err(LinalgError::ModeMismatch),
        }
    }

    fn float_matrix(&self) -> LinalgResult<&DMatrix<f64>> {
        match &self.store {
            OpStore::Exact(_) => Err(LinalgError::ModeMismatch),
            OpStore::Float(m) => Ok(m),
        }
    }

    fn exact_elimination(&self) -> LinalgResult<&ExactElimination> {
        let rows = self.exact_rows()?;
        Ok(self
            .exact_cache
            .get_or_init(|| ExactElimination::new(rows, self.cols)))
    }

    fn exact_solver(&self) -> LinalgResult<&ExactElimination> {
        let rows = self.exact_rows()?;
        Ok(self
            .exact_solver_cache
            .get_or_init(|| ExactElimination::with_solver(rows, self.cols)))
    }

    /// Modular full-rank certificate: `Some(min(rows, cols))` when the
    /// operator provably has full rank, which short-circuits the exact
    /// elimination in the common injective/surjective/bijective cases.
    fn certified_full_rank(&self) -> LinalgResult<Option<usize>> {
        let rows = self.exact_rows()?;
        Ok(*self
            .full_rank_cert
            .get_or_init(|| super::modular::certified_full_rank(rows, self.cols)))
    }

    pub fn float_analysis(&self) -> LinalgResult<&FloatAnalysis> {
        let matrix = self.float_matrix()?;
        Ok(self.float_cache.get_or_init(|| FloatAnalysis::new(matrix.clone())))
    }

    pub fn rank(&self, policy: &RankPolicy) -> LinalgResult<usize> {
        match &self.store {
            OpStore::Exact(_) => {
                if let Some(full) = self.certified_full_rank()? {
                    return Ok(full);
                }
                Ok(self.exact_elimination()?.rank())
            }
            OpStore::Float(_) => self.float_analysis()?.rank(policy),
        }
    }

    pub fn kernel(&self, policy: &RankPolicy) -> LinalgResult<Subspace> {
        match &self.store {
            OpStore::Exact(_) => {
                // An injectivity certificate settles the kernel without
                // elimination.
                if self.certified_full_rank()? == Some(self.cols) {
                    return Ok(Subspace::zero(self.cols, Mode::Exact));
                }
                let basis = self.exact_elimination()?.kernel_basis();
                Ok(Subspace::from_exact_independent(self.cols, basis))
            }
            OpStore::Float(_) => {
                let analysis = self.float_analysis()?;
                let rank = analysis.rank(policy)?;
                Ok(Subspace::from_float_orthonormal(analysis.kernel_basis(rank)))
            }
        }
    }

    pub fn image(&self, policy: &RankPolicy) -> LinalgResult<Subspace> {
        match &self.store {
            OpStore::Exact(rows) => {
                let elim = self.exact_elimination()?;
                let basis = elim
                    .pivot_columns()
                    .iter()
                    .map(|&c| rows.iter().map(|row| row[c].clone()).collect())
                    .collect();
                Ok(Subspace::from_exact_independent(self.rows, basis))
            }
            OpStore::Float(_) => {
                let analysis = self.float_analysis()?;
                let rank = analysis.rank(policy)?;
                Ok(Subspace::from_float_orthonormal(analysis.image_basis(rank)))
            }
        }
    }

    pub fn apply_exact(&self, x: &[BigRational]) -> LinalgResult<Vec<BigRational>> {
        let rows = self.exact_rows()?;
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok(rows
            .iter()
            .map(|row| {
                let mut acc = BigRational::zero();
                for (a, b) in row.iter().zip(x) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect())
    }

    pub fn apply_float(&self, x: &[f64]) -> LinalgResult<Vec<f64>> {
        let matrix = self.float_matrix()?;
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        let v = DVector::from_column_slice(x);
        Ok((matrix * v).iter().copied().collect())
    }

    /// Applies the operator to a form field of the matching mode and degree.
    pub fn apply_field<S: Scalar>(&self, field: &FormField<S>) -> LinalgResult<FormField<S>> {
        let (Some(domain), Some(codomain)) = (self.domain, self.codomain) else {
            return Err(LinalgError::MissingDegrees);
        };
        if field.degree() != domain {
            return Err(LinalgError::DimensionMismatch {
                expected: domain.components(),
                got: field.degree().components(),
            });
        }
        let out = if S::EXACT {
            let x: Vec<BigRational> = field
                .coeffs()
                .iter()
                .map(|c| c.to_exact().expect("exact scalar"))
                .collect();
            self.apply_exact(&x)?.into_iter().map(S::from_exact).collect()
        } else {
            self.apply_float(&field.coeffs().iter().map(Scalar::to_f64).collect::<Vec<_>>())?
                .into_iter()
                .map(S::from_f64_exact)
                .collect()
        };
        Ok(FormField::from_coeffs(codomain, out).expect("codomain length"))
    }

    /// Exact solve; `NotInImage` when the right-hand side is outside the
    /// image.
    pub fn solve_exact(&self, rhs: &[BigRational]) -> LinalgResult<Vec<BigRational>> {
        if rhs.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows,
                got: rhs.len(),
            });
        }
        self.exact_solver()?
            .solve(rhs)
            .ok_or(LinalgError::NotInImage { residual: None })
    }

    /// Minimum-norm float solve with a membership check: the relative
    /// residual must stay below `rel_tol`.
    pub fn solve_float(
        &self,
        rhs: &[f64],
        policy: &RankPolicy,
        rel_tol: f64,
    ) -> LinalgResult<Vec<f64>> {
        if rhs.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows,
                got: rhs.len(),
            });
        }
        let analysis = self.float_analysis()?;
        let rank = analysis.rank(policy)?;
        let b = DVector::from_column_slice(rhs);
        let scale = b.norm().max(1.0);
        let (x, residual) = analysis.solve_min_norm(&b, rank);
        if residual > rel_tol * scale {
            return Err(LinalgError::NotInImage {
                residual: Some(residual),
            });
        }
        Ok(x.iter().copied().collect())
    }

    /// Vertical concatenation of operators with a common domain; kernels of
    /// the stack are intersections of the kernels.
    pub fn stack(parts: &[&LinearOperator]) -> LinalgResult<LinearOperator> {
        let first = parts.first().ok_or(LinalgError::EmptyStack)?;
        let cols = first.cols;
        let mode = first.mode();
        if parts.iter().any(|p| p.cols != cols || p.mode() != mode) {
            return Err(LinalgError::ModeMismatch);
        }
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut op = match mode {
            Mode::Exact => {
                let mut all = Vec::with_capacity(rows);
                for p in parts {
                    all.extend(p.exact_rows()?.iter().cloned());
                }
                LinearOperator::new(rows, cols, OpStore::Exact(all))
            }
            Mode::Float => {
                let mut matrix = DMatrix::zeros(rows, cols);
                let mut offset = 0;
                for p in parts {
                    let m = p.float_matrix()?;
                    matrix.view_mut((offset, 0), (p.rows, cols)).copy_from(m);
                    offset += p.rows;
                }
                LinearOperator::new(rows, cols, OpStore::Float(matrix))
            }
        };
        if parts.iter().all(|p| p.domain == first.domain) {
            op.domain = first.domain;
        }
        Ok(op)
    }

    /// The operator restricted to a subspace of its domain: columns become
    /// images of the subspace basis vectors.
    pub fn restrict_to(&self, sub: &Subspace) -> LinalgResult<LinearOperator> {
        if sub.ambient() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                got: sub.ambient(),
            });
        }
        match (&self.store, sub.mode()) {
            (OpStore::Exact(_), Mode::Exact) => {
                let basis = sub.exact_basis()?;
                let images: Vec<Vec<BigRational>> = basis
                    .iter()
                    .map(|v| self.apply_exact(v))
                    .collect::<LinalgResult<_>>()?;
                let rows_data: Vec<Vec<BigRational>> = (0..self.rows)
                    .map(|r| images.iter().map(|img| img[r].clone()).collect())
                    .collect();
                Ok(LinearOperator::new(
                    self.rows,
                    basis.len(),
                    OpStore::Exact(rows_data),
                ))
            }
            (OpStore::Float(m), Mode::Float) => {
                let basis = sub.float_basis()?;
                Ok(LinearOperator::new(
                    self.rows,
                    basis.ncols(),
                    OpStore::Float(m * basis),
                ))
            }
            _ => Err(LinalgError::ModeMismatch),
        }
    }

    /// Kernel of the operator inside a given subspace of its domain,
    /// returned in ambient coordinates.
    pub fn kernel_within(&self, sub: &Subspace, policy: &RankPolicy) -> LinalgResult<Subspace> {
        let restricted = self.restrict_to(sub)?;
        let inner = restricted.kernel(policy)?;
        sub.spanned_by_coordinates(&inner)
    }
}
