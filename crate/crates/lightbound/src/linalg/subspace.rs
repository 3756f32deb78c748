//! Subspaces of component spaces, with intersection, orthogonal complement
//! and projection.
//!
//! Float subspaces keep an orthonormal basis (columns of `B`), so the
//! Euclidean projector is `B B^T`. Exact subspaces keep any independent
//! rational basis and project through the Gram system.

use nalgebra::{DMatrix, DVector};
use num::{BigRational, Zero};

use super::float::{FloatAnalysis, RankPolicy};
use super::operator::LinearOperator;
use super::rational::ExactElimination;
use super::{LinalgError, LinalgResult, Mode};

#[derive(Debug, Clone)]
enum BasisStore {
    /// Independent basis vectors.
    Exact(Vec<Vec<BigRational>>),
    /// Orthonormal basis vectors as matrix columns.
    Float(DMatrix<f64>),
}

#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    store: BasisStore,
}

impl Subspace {
    /// Wraps exact basis vectors that are already linearly independent
    /// (kernels and intersections produce such bases by construction).
    pub fn from_exact_independent(ambient: usize, basis: Vec<Vec<BigRational>>) -> Self {
        debug_assert!(basis.iter().all(|v| v.len() == ambient));
        Self {
            ambient,
            store: BasisStore::Exact(basis),
        }
    }

    /// Spans exact vectors, pruning dependent ones.
    pub fn span_exact(ambient: usize, vectors: &[Vec<BigRational>]) -> Self {
        let rows: Vec<Vec<BigRational>> = (0..ambient)
            .map(|r| vectors.iter().map(|v| v[r].clone()).collect())
            .collect();
        let elim = ExactElimination::new(&rows, vectors.len());
        let basis = elim
            .pivot_columns()
            .iter()
            .map(|&c| vectors[c].clone())
            .collect();
        Self::from_exact_independent(ambient, basis)
    }

    /// Wraps an already orthonormal float basis (SVD output).
    pub fn from_float_orthonormal(basis: DMatrix<f64>) -> Self {
        Self {
            ambient: basis.nrows(),
            store: BasisStore::Float(basis),
        }
    }

    /// Spans float vectors (columns), orthonormalising and pruning to the
    /// numerical rank under the policy.
    pub fn span_float(
        vectors: DMatrix<f64>,
        policy: &RankPolicy,
    ) -> LinalgResult<Self> {
        let analysis = FloatAnalysis::new(vectors);
        let rank = analysis.rank(policy)?;
        Ok(Self::from_float_orthonormal(analysis.image_basis(rank)))
    }

    pub fn zero(ambient: usize, mode: Mode) -> Self {
        match mode {
            Mode::Exact => Self::from_exact_independent(ambient, Vec::new()),
            Mode::Float => Self::from_float_orthonormal(DMatrix::zeros(ambient, 0)),
        }
    }

    pub fn full(ambient: usize, mode: Mode) -> Self {
        match mode {
            Mode::Exact => {
                let basis = (0..ambient)
                    .map(|i| {
                        let mut v = vec![BigRational::zero(); ambient];
                        v[i] = BigRational::from_integer(1.into());
                        v
                    })
                    .collect();
                Self::from_exact_independent(ambient, basis)
            }
            Mode::Float => Self::from_float_orthonormal(DMatrix::identity(ambient, ambient)),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        match &self.store {
            BasisStore::Exact(basis) => basis.len(),
            BasisStore::Float(basis) => basis.ncols(),
        }
    }

    pub fn mode(&self) -> Mode {
        match &self.store {
            BasisStore::Exact(_) => Mode::Exact,
            BasisStore::Float(_) => Mode::Float,
        }
    }

    pub fn exact_basis(&self) -> LinalgResult<&[Vec<BigRational>]> {
        match &self.store {
            BasisStore::Exact(basis) => Ok(basis),
            BasisStore::Float(_) => Err(LinalgError::ModeMismatch),
        }
    }

    pub fn float_basis(&self) -> LinalgResult<&DMatrix<f64>> {
        match &self.store {
            BasisStore::Exact(_) => Err(LinalgError::ModeMismatch),
            BasisStore::Float(basis) => Ok(basis),
        }
    }

    /// The subspace as an operator from coordinates to ambient vectors.
    pub fn as_operator(&self) -> LinearOperator {
        match &self.store {
            BasisStore::Exact(basis) => {
                let rows = (0..self.ambient)
                    .map(|r| basis.iter().map(|v| v[r].clone()).collect())
                    .collect();
                LinearOperator::from_exact_rows(rows, basis.len())
            }
            BasisStore::Float(basis) => LinearOperator::from_float_matrix(basis.clone()),
        }
    }

    /// Maps a subspace expressed in this basis' coordinates back to ambient
    /// vectors.
    pub fn spanned_by_coordinates(&self, coords: &Subspace) -> LinalgResult<Subspace> {
        if coords.ambient() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                got: coords.ambient(),
            });
        }
        match (&self.store, &coords.store) {
            (BasisStore::Exact(basis), BasisStore::Exact(inner)) => {
                let vectors: Vec<Vec<BigRational>> = inner
                    .iter()
                    .map(|x| {
                        let mut v = vec![BigRational::zero(); self.ambient];
                        for (coeff, bvec) in x.iter().zip(basis) {
                            if coeff.is_zero() {
                                continue;
                            }
                            for (slot, b) in v.iter_mut().zip(bvec) {
                                *slot += coeff * b;
                            }
                        }
                        v
                    })
                    .collect();
                // Independent coordinates stay independent under an
                // injective basis matrix.
                Ok(Subspace::from_exact_independent(self.ambient, vectors))
            }
            (BasisStore::Float(basis), BasisStore::Float(inner)) => {
                // An orthonormal basis times orthonormal coordinates is
                // orthonormal.
                Ok(Subspace::from_float_orthonormal(basis * inner))
            }
            _ => Err(LinalgError::ModeMismatch),
        }
    }

    /// Intersection of two subspaces of the same ambient space.
    pub fn intersect(&self, other: &Subspace, policy: &RankPolicy) -> LinalgResult<Subspace> {
        if self.ambient != other.ambient {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ambient,
                got: other.ambient,
            });
        }
        match (&self.store, &other.store) {
            (BasisStore::Exact(a), BasisStore::Exact(b)) => {
                // Kernel of [A | -B]: the A-part of each kernel vector spans
                // the intersection.
                let cols = a.len() + b.len();
                let rows: Vec<Vec<BigRational>> = (0..self.ambient)
                    .map(|r| {
                        a.iter()
                            .map(|v| v[r].clone())
                            .chain(b.iter().map(|v| -v[r].clone()))
                            .collect()
                    })
                    .collect();
                let elim = ExactElimination::new(&rows, cols);
                let vectors: Vec<Vec<BigRational>> = elim
                    .kernel_basis()
                    .into_iter()
                    .map(|k| {
                        let mut v = vec![BigRational::zero(); self.ambient];
                        for (coeff, bvec) in k[..a.len()].iter().zip(a) {
                            if coeff.is_zero() {
                                continue;
                            }
                            for (slot, bv) in v.iter_mut().zip(bvec) {
                                *slot += coeff * bv;
                            }
                        }
                        v
                    })
                    .collect();
                Ok(Subspace::from_exact_independent(self.ambient, vectors))
            }
            (BasisStore::Float(a), BasisStore::Float(b)) => {
                let mut stacked = DMatrix::zeros(self.ambient, a.ncols() + b.ncols());
                stacked.view_mut((0, 0), (self.ambient, a.ncols())).copy_from(a);
                stacked
                    .view_mut((0, a.ncols()), (self.ambient, b.ncols()))
                    .copy_from(&(-b));
                let analysis = FloatAnalysis::new(stacked);
                let rank = analysis.rank(policy)?;
                let kernel = analysis.kernel_basis(rank);
                let vectors = a * kernel.view((0, 0), (a.ncols(), kernel.ncols()));
                Subspace::span_float(vectors, policy)
            }
            _ => Err(LinalgError::ModeMismatch),
        }
    }

    /// Euclidean orthogonal complement within the ambient space: the kernel
    /// of the transposed basis.
    pub fn orthocomplement(&self, policy: &RankPolicy) -> LinalgResult<Subspace> {
        match &self.store {
            BasisStore::Exact(basis) => {
                let elim = ExactElimination::new(basis, self.ambient);
                Ok(Subspace::from_exact_independent(
                    self.ambient,
                    elim.kernel_basis(),
                ))
            }
            BasisStore::Float(basis) => {
                let analysis = FloatAnalysis::new(basis.transpose());
                let rank = analysis.rank(policy)?;
                Ok(Subspace::from_float_orthonormal(analysis.kernel_basis(rank)))
            }
        }
    }

    /// Euclidean orthogonal projection of an exact vector onto the subspace.
    pub fn project_exact(&self, v: &[BigRational]) -> LinalgResult<Vec<BigRational>> {
        let basis = self.exact_basis()?;
        if v.len() != self.ambient {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ambient,
                got: v.len(),
            });
        }
        let dim = basis.len();
        if dim == 0 {
            return Ok(vec![BigRational::zero(); self.ambient]);
        }
        // Solve the Gram system G x = B^T v, project = B x.
        let gram: Vec<Vec<BigRational>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| dot_exact(&basis[i], &basis[j]))
                    .collect()
            })
            .collect();
        let rhs: Vec<BigRational> = (0..dim).map(|i| dot_exact(&basis[i], v)).collect();
        let elim = ExactElimination::with_solver(&gram, dim);
        let x = elim.solve(&rhs).expect("Gram matrix of a basis is invertible");
        let mut out = vec![BigRational::zero(); self.ambient];
        for (coeff, bvec) in x.iter().zip(basis) {
            if coeff.is_zero() {
                continue;
            }
            for (slot, b) in out.iter_mut().zip(bvec) {
                *slot += coeff * b;
            }
        }
        Ok(out)
    }

    /// Euclidean orthogonal projection of a float vector onto the subspace.
    pub fn project_float(&self, v: &[f64]) -> LinalgResult<Vec<f64>> {
        let basis = self.float_basis()?;
        if v.len() != self.ambient {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ambient,
                got: v.len(),
            });
        }
        let vec = DVector::from_column_slice(v);
        let projected = basis * (basis.transpose() * vec);
        Ok(projected.iter().copied().collect())
    }

    /// The Euclidean projector matrix (float mode).
    pub fn projector_matrix(&self) -> LinalgResult<DMatrix<f64>> {
        let basis = self.float_basis()?;
        Ok(basis * basis.transpose())
    }

    /// Membership test. Exact mode decides exactly; float mode compares the
    /// projection residual against `tol` times the vector scale.
    pub fn contains_exact(&self, v: &[BigRational]) -> LinalgResult<bool> {
        let projected = self.project_exact(v)?;
        Ok(projected.iter().zip(v).all(|(p, x)| p == x))
    }

    pub fn contains_float(&self, v: &[f64], tol: f64) -> LinalgResult<bool> {
        let projected = self.project_float(v)?;
        let mut err = 0.0f64;
        let mut scale = 1.0f64;
        for (p, x) in projected.iter().zip(v) {
            err += (p - x) * (p - x);
            scale += x * x;
        }
        Ok(err.sqrt() <= tol * scale.sqrt())
    }

    /// Span of the union of two subspaces.
    pub fn sum(&self, other: &Subspace, policy: &RankPolicy) -> LinalgResult<Subspace> {
        if self.ambient != other.ambient {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ambient,
                got: other.ambient,
            });
        }
        match (&self.store, &other.store) {
            (BasisStore::Exact(a), BasisStore::Exact(b)) => {
                let mut all = a.clone();
                all.extend(b.iter().cloned());
                Ok(Subspace::span_exact(self.ambient, &all))
            }
            (BasisStore::Float(a), BasisStore::Float(b)) => {
                let mut stacked = DMatrix::zeros(self.ambient, a.ncols() + b.ncols());
                stacked.view_mut((0, 0), (self.ambient, a.ncols())).copy_from(a);
                stacked
                    .view_mut((0, a.ncols()), (self.ambient, b.ncols()))
                    .copy_from(b);
                Subspace::span_float(stacked, policy)
            }
            _ => Err(LinalgError::ModeMismatch),
        }
    }

    /// Converts an exact subspace to float mode (orthonormalising); float
    /// subspaces pass through.
    pub fn to_float(&self, policy: &RankPolicy) -> LinalgResult<Subspace> {
        match &self.store {
            BasisStore::Exact(basis) => {
                let matrix = DMatrix::from_fn(self.ambient, basis.len(), |r, c| {
                    crate::scalar::Scalar::to_f64(&basis[c][r])
                });
                Subspace::span_float(matrix, policy)
            }
            BasisStore::Float(basis) => Ok(Subspace::from_float_orthonormal(basis.clone())),
        }
    }
}

fn dot_exact(a: &[BigRational], b: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}
