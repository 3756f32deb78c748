//! Boundary coframes and their derived geometry.
//!
//! A boundary coframe assigns to each of the `N-1` boundary directions a
//! vector in an `N`-dimensional Minkowski fiber, injectively, together with a
//! transversal fiber vector `e_n` completing the rows to a fiber basis. From
//! this data the module derives the induced boundary metric
//! `g[mu][nu] = eta(e_mu, e_nu)` and classifies its signature: either
//! nondegenerate, or lightlike with exactly one null direction `X`.
//!
//! In the lightlike case the coframe splits as `e = e_tilde + e_hat` along a
//! one-form `beta` with `iota_X beta = 1`. `beta` is fixed by a linear
//! condition: after contracting with the chosen transversal coordinate
//! directions, `e_tilde ^ e^(N-4) ^ v` must vanish for every `v` in the
//! kernel of the wedge map on (1,2)-forms. The resulting reduced coframe
//! `e_tilde` annihilates `X` and carries the degenerate metric block.
//!
//! The module also flattens wedge-with-`e^k` and bracket-with-`e` maps into
//! [`LinearOperator`]s, builds the kernel-intersection subspaces that control
//! the degenerate boundary structure ([`spaces`]), verifies closed-form
//! component equations for those subspaces ([`tau`]), samples random exact
//! coframes of both signature classes ([`sample`]), and reads/writes fixture
//! files ([`fixture`]).

use num::rational::BigRational;
use thiserror::Error;

use crate::forms::{eta_sign, FormDegree, FormError, FormField};
use crate::linalg::{
    dense_inverse, dense_rank, dense_transpose, ExactElimination, FloatAnalysis, LinalgError,
    LinearOperator, RankPolicy, Subspace,
};
use crate::scalar::Scalar;

pub mod fixture;
pub mod sample;
pub mod spaces;
pub mod tau;

#[cfg(test)]
mod tests;

/// Relative residual allowed when solving the covector-fixing system in
/// float mode; the system is consistent in exact arithmetic, so anything
/// larger signals a broken operator, not numerical noise.
const COVECTOR_SOLVE_TOL: f64 = 1e-6;

/// Relative threshold below which a float eigenvalue of the boundary metric
/// counts as zero during signature classification.
const EIGENVALUE_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CoframeError {
    #[error("boundary coframe must have degree (1,1) with fiber dimension = base dimension + 1, got {0}")]
    BadCoframeDegree(FormDegree),
    #[error("transversal must have degree (0,1) over the same spaces as the coframe, got {0}")]
    BadTransversalDegree(FormDegree),
    #[error("boundary coframe rows are linearly dependent (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },
    #[error("coframe rows plus transversal do not span the fiber")]
    NotAFrame,
    #[error(
        "boundary metric signature ({positive},{negative},{zero}) is neither nondegenerate \
         nor lightlike with a single null direction"
    )]
    UnsupportedSignature {
        positive: usize,
        negative: usize,
        zero: usize,
    },
    #[error("covector fixing system has no admissible solution (residual {residual:.3e})")]
    CovectorFixing { residual: f64 },
    #[error("operation requires a lightlike coframe")]
    NotLightlike,
    #[error("closed-form component equations are only available in bulk dimension 4, got {got}")]
    DimensionNotFour { got: usize },
    #[error("coordinates not adapted to the null direction: {detail}")]
    NotAdapted { detail: String },
    #[error("wedge power {k} starting from degree ({form},{internal}) exceeds the top degree")]
    DegreeOverflow {
        k: usize,
        form: usize,
        internal: usize,
    },
    #[error("bracket map needs at least one fiber index, got internal degree 0")]
    NoFiberIndex,
    #[error("fixture parse error at line {line}: {message}")]
    Fixture { line: usize, message: String },
    #[error("fixture declares signature `{declared}` but the coframe builds as `{detected}`")]
    FixtureSignatureMismatch { declared: String, detected: String },
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type CoframeResult<T> = Result<T, CoframeError>;

/// Signature class of the induced boundary metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignatureClass {
    /// All eigenvalues nonzero; `positive + negative = N - 1`.
    Nondegenerate { positive: usize, negative: usize },
    /// Exactly one zero eigenvalue and no negative ones: one null direction.
    Lightlike,
}

impl std::fmt::Display for SignatureClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SignatureClass::Nondegenerate { positive, negative } => {
                write!(f, "nondegenerate ({positive},{negative})")
            }
            SignatureClass::Lightlike => write!(f, "lightlike"),
        }
    }
}

/// Geometry derived from a lightlike boundary metric: the null direction,
/// the fixed dual covector, and the induced split of the coframe.
#[derive(Debug, Clone)]
pub struct LightlikeData<S: Scalar> {
    /// Null direction `X` with `g X = 0`, normalised so its largest-magnitude
    /// component is one.
    pub null_direction: Vec<S>,
    /// One-form `beta` with `iota_X beta = 1`, fixed by the kernel condition.
    pub null_covector: Vec<S>,
    /// `e_hat = beta (iota_X e)`: the part of the coframe along the null
    /// direction.
    pub null_part: FormField<S>,
    /// `e_tilde = e - e_hat`: annihilates `X`.
    pub reduced_coframe: FormField<S>,
    /// `eta(e_tilde, e_tilde)`: the reduced metric (rank `N-2`).
    pub reduced_metric: Vec<Vec<S>>,
    /// Base axes used as the transversal completion in the covector-fixing
    /// contractions: every coordinate direction except the one carrying the
    /// largest component of `X`.
    pub completion_axes: Vec<usize>,
    /// Sup-norm defect of the covector-fixing condition, evaluated on the
    /// computed split; exactly zero in exact mode.
    pub covector_residual: f64,
}

/// A boundary coframe with its transversal completion and all geometry
/// derived from the induced metric.
#[derive(Debug, Clone)]
pub struct BoundaryCoframe<S: Scalar> {
    n: usize,
    e: FormField<S>,
    e_n: FormField<S>,
    g_boundary: Vec<Vec<S>>,
    class: SignatureClass,
    light: Option<LightlikeData<S>>,
}

impl<S: Scalar> BoundaryCoframe<S> {
    /// Builds the full geometric record from the coframe rows and the
    /// transversal fiber vector, classifying the signature and, for
    /// lightlike metrics, solving the covector-fixing system.
    pub fn new(e: FormField<S>, e_n: FormField<S>) -> CoframeResult<Self> {
        let d = e.degree();
        if d.form != 1 || d.internal != 1 || d.fiber_dim != d.base_dim + 1 {
            return Err(CoframeError::BadCoframeDegree(d));
        }
        let n = d.fiber_dim;
        let dn = e_n.degree();
        if dn.form != 0 || dn.internal != 1 || !dn.same_spaces(&d) {
            return Err(CoframeError::BadTransversalDegree(dn));
        }

        let mut frame = coframe_rows(&e);
        let e_rank = dense_rank(&frame);
        if e_rank < n - 1 {
            return Err(CoframeError::RankDeficient {
                rank: e_rank,
                expected: n - 1,
            });
        }
        frame.push(fiber_vector(&e_n));
        if dense_rank(&frame) < n {
            return Err(CoframeError::NotAFrame);
        }

        let g_boundary = minkowski_gram(&frame[..n - 1], n);
        let (positive, negative, zero) = inertia::<S>(&g_boundary);
        let class = match (negative, zero) {
            (_, 0) => SignatureClass::Nondegenerate { positive, negative },
            (0, 1) => SignatureClass::Lightlike,
            _ => {
                return Err(CoframeError::UnsupportedSignature {
                    positive,
                    negative,
                    zero,
                })
            }
        };

        let light = match class {
            SignatureClass::Nondegenerate { .. } => None,
            SignatureClass::Lightlike => Some(build_lightlike_data(n, &e, &g_boundary)?),
        };

        Ok(Self {
            n,
            e,
            e_n,
            g_boundary,
            class,
            light,
        })
    }

    /// Bulk dimension `N`; the boundary has dimension `N - 1`.
    pub fn bulk_dimension(&self) -> usize {
        self.n
    }

    pub fn boundary_dimension(&self) -> usize {
        self.n - 1
    }

    /// The coframe as a (1,1)-form field.
    pub fn coframe(&self) -> &FormField<S> {
        &self.e
    }

    /// The transversal fiber vector completing the coframe rows to a basis.
    pub fn transversal(&self) -> &FormField<S> {
        &self.e_n
    }

    /// Induced boundary metric `eta(e, e)`, an `(N-1) x (N-1)` symmetric
    /// matrix.
    pub fn boundary_metric(&self) -> &[Vec<S>] {
        &self.g_boundary
    }

    pub fn signature_class(&self) -> SignatureClass {
        self.class
    }

    pub fn is_lightlike(&self) -> bool {
        matches!(self.class, SignatureClass::Lightlike)
    }

    /// Lightlike geometry record, present iff the metric is lightlike.
    pub fn lightlike(&self) -> Option<&LightlikeData<S>> {
        self.light.as_ref()
    }

    /// The reduced coframe `e_tilde`; equal to `e` itself for nondegenerate
    /// metrics, where the split is trivial.
    pub fn reduced_coframe(&self) -> &FormField<S> {
        match &self.light {
            Some(l) => &l.reduced_coframe,
            None => &self.e,
        }
    }

    /// Metric of the reduced coframe; equals the boundary metric in the
    /// nondegenerate case.
    pub fn reduced_metric(&self) -> &[Vec<S>] {
        match &self.light {
            Some(l) => &l.reduced_metric,
            None => &self.g_boundary,
        }
    }

    /// Frame rows `e_1, ..., e_{N-1}, e_n` as an `N x N` matrix over the
    /// fiber coordinates.
    pub fn frame_rows(&self) -> Vec<Vec<S>> {
        let mut rows = coframe_rows(&self.e);
        rows.push(fiber_vector(&self.e_n));
        rows
    }

    /// Rewrites the fiber indices of `field` in the frame basis
    /// `(e_1, ..., e_{N-1}, e_n)`. In this basis the coframe itself has
    /// identity components, which is the setting in which all closed-form
    /// component equations are stated.
    pub fn express_in_frame(&self, field: &FormField<S>) -> CoframeResult<FormField<S>> {
        let transpose = dense_transpose(&self.frame_rows());
        let m = dense_inverse(&transpose).ok_or(CoframeError::NotAFrame)?;
        Ok(field.fiber_change_of_basis(&m)?)
    }

    /// Matrix of wedging with `e^k` from degree `(form, internal)`; exact or
    /// float mode follows the scalar type.
    pub fn wedge_operator(
        &self,
        k: usize,
        form: usize,
        internal: usize,
    ) -> CoframeResult<LinearOperator> {
        wedge_with_power_operator(&self.e, k, form, internal)
    }

    /// Matrix of `x -> [x, e]` from degree `(form, internal)`.
    pub fn bracket_operator(&self, form: usize, internal: usize) -> CoframeResult<LinearOperator> {
        bracket_with_coframe_operator(&self.e, form, internal)
    }

    /// Matrix of `x -> [x, e_tilde]` with the reduced coframe; coincides
    /// with [`Self::bracket_operator`] in the nondegenerate case.
    pub fn reduced_bracket_operator(
        &self,
        form: usize,
        internal: usize,
    ) -> CoframeResult<LinearOperator> {
        bracket_with_coframe_operator(self.reduced_coframe(), form, internal)
    }
}

/// Matrix of wedging with `coframe^k` on forms of degree `(form, internal)`
/// over the coframe's base and fiber. Works for bulk coframes (square) and
/// boundary coframes alike.
pub fn wedge_with_power_operator<S: Scalar>(
    coframe: &FormField<S>,
    k: usize,
    form: usize,
    internal: usize,
) -> CoframeResult<LinearOperator> {
    let d = coframe.degree();
    if form + k > d.base_dim || internal + k > d.fiber_dim {
        return Err(CoframeError::DegreeOverflow { k, form, internal });
    }
    let power = coframe.wedge_power(k)?;
    let domain = FormDegree::new(d.base_dim, d.fiber_dim, form, internal);
    let codomain = FormDegree::new(d.base_dim, d.fiber_dim, form + k, internal + k);
    Ok(LinearOperator::from_basis_map::<S, _>(
        domain,
        codomain,
        |b| b.wedge(&power),
    )?)
}

/// Matrix of `x -> [x, coframe]` on forms of degree `(form, internal)`,
/// lowering the fiber degree by one and raising the base degree by one.
pub fn bracket_with_coframe_operator<S: Scalar>(
    coframe: &FormField<S>,
    form: usize,
    internal: usize,
) -> CoframeResult<LinearOperator> {
    let d = coframe.degree();
    if internal == 0 {
        return Err(CoframeError::NoFiberIndex);
    }
    if form + 1 > d.base_dim {
        return Err(CoframeError::DegreeOverflow {
            k: 1,
            form,
            internal,
        });
    }
    let domain = FormDegree::new(d.base_dim, d.fiber_dim, form, internal);
    let codomain = FormDegree::new(d.base_dim, d.fiber_dim, form + 1, internal - 1);
    Ok(LinearOperator::from_basis_map::<S, _>(
        domain,
        codomain,
        |b| b.rho_action(coframe),
    )?)
}

/// Converts a subspace basis into form fields of the given degree, following
/// the scalar type's mode.
pub fn subspace_fields<S: Scalar>(
    sub: &Subspace,
    degree: FormDegree,
) -> CoframeResult<Vec<FormField<S>>> {
    let mut out = Vec::with_capacity(sub.dim());
    if S::EXACT {
        for v in sub.exact_basis()? {
            let coeffs = v.iter().map(|x| S::from_exact(x.clone())).collect();
            out.push(FormField::from_coeffs(degree, coeffs)?);
        }
    } else {
        let basis = sub.float_basis()?;
        for c in 0..basis.ncols() {
            let coeffs = (0..basis.nrows())
                .map(|r| S::from_f64_exact(basis[(r, c)]))
                .collect();
            out.push(FormField::from_coeffs(degree, coeffs)?);
        }
    }
    Ok(out)
}

fn coframe_rows<S: Scalar>(e: &FormField<S>) -> Vec<Vec<S>> {
    let d = e.degree();
    (0..d.base_dim)
        .map(|mu| {
            (0..d.fiber_dim)
                .map(|a| {
                    e.coeff(&[mu as u8], &[a as u8])
                        .expect("coframe degree (1,1)")
                })
                .collect()
        })
        .collect()
}

fn fiber_vector<S: Scalar>(v: &FormField<S>) -> Vec<S> {
    let d = v.degree();
    (0..d.fiber_dim)
        .map(|a| v.coeff(&[], &[a as u8]).expect("fiber vector degree (0,1)"))
        .collect()
}

/// Gram matrix of fiber vectors under the Minkowski metric.
fn minkowski_gram<S: Scalar>(rows: &[Vec<S>], fiber_dim: usize) -> Vec<Vec<S>> {
    rows.iter()
        .map(|ri| {
            rows.iter()
                .map(|rj| {
                    let mut acc = S::zero();
                    for a in 0..fiber_dim {
                        let sign = eta_sign(a as u8, fiber_dim);
                        let term = ri[a].clone() * rj[a].clone();
                        acc = if sign < 0 { acc - term } else { acc + term };
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Inertia (positive, negative, zero counts) of a symmetric matrix,
/// dispatched on the scalar mode.
fn inertia<S: Scalar>(g: &[Vec<S>]) -> (usize, usize, usize) {
    if S::EXACT {
        let rows: Vec<Vec<BigRational>> = g
            .iter()
            .map(|r| r.iter().map(|x| x.to_exact().expect("exact scalar")).collect())
            .collect();
        exact_inertia(rows)
    } else {
        float_inertia(g)
    }
}

/// Sylvester inertia by symmetric congruence over the rationals. Diagonal
/// pivots are eliminated through the Schur complement; when only
/// off-diagonal entries remain, adding one row/column pair to another
/// manufactures a nonzero diagonal without changing the inertia.
fn exact_inertia(mut g: Vec<Vec<BigRational>>) -> (usize, usize, usize) {
    use num::Zero;
    let n = g.len();
    let mut positive = 0;
    let mut negative = 0;
    let mut k = 0;
    while k < n {
        let diag = (k..n).find(|&i| !g[i][i].is_zero());
        match diag {
            Some(i) => {
                if i != k {
                    g.swap(i, k);
                    for row in g.iter_mut() {
                        row.swap(i, k);
                    }
                }
                if g[k][k] > BigRational::zero() {
                    positive += 1;
                } else {
                    negative += 1;
                }
                let pivot = g[k][k].clone();
                for r in k + 1..n {
                    if g[r][k].is_zero() {
                        continue;
                    }
                    let factor = &g[r][k] / &pivot;
                    for c in k + 1..n {
                        let delta = &factor * &g[k][c];
                        g[r][c] = &g[r][c] - &delta;
                    }
                }
                // Zero the pivot row/column so later passes ignore it.
                for idx in k + 1..n {
                    g[idx][k] = BigRational::zero();
                    g[k][idx] = BigRational::zero();
                }
                k += 1;
            }
            None => {
                let pair = (k..n)
                    .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !g[i][j].is_zero());
                match pair {
                    Some((i, j)) => {
                        for c in k..n {
                            let add = g[j][c].clone();
                            g[i][c] = &g[i][c] + &add;
                        }
                        for r in k..n {
                            let add = g[r][j].clone();
                            g[r][i] = &g[r][i] + &add;
                        }
                    }
                    None => break,
                }
            }
        }
    }
    (positive, negative, n - positive - negative)
}

fn float_inertia<S: Scalar>(g: &[Vec<S>]) -> (usize, usize, usize) {
    let n = g.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| g[i][j].to_f64());
    let eigen = m.symmetric_eigen();
    let scale = eigen
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0_f64, f64::max);
    let threshold = EIGENVALUE_ZERO_TOL * scale.max(f64::MIN_POSITIVE);
    let mut counts = (0, 0, 0);
    for l in eigen.eigenvalues.iter() {
        if l.abs() <= threshold {
            counts.2 += 1;
        } else if *l > 0.0 {
            counts.0 += 1;
        } else {
            counts.1 += 1;
        }
    }
    counts
}

/// Extracts the (unique) null direction from a lightlike boundary metric and
/// normalises its largest-magnitude component to one.
fn null_direction<S: Scalar>(g: &[Vec<S>]) -> CoframeResult<Vec<S>> {
    let dim = g.len();
    let mut x: Vec<S> = if S::EXACT {
        let rows: Vec<Vec<BigRational>> = g
            .iter()
            .map(|r| r.iter().map(|v| v.to_exact().expect("exact scalar")).collect())
            .collect();
        let elim = ExactElimination::new(&rows, dim);
        let kernel = elim.kernel_basis();
        debug_assert_eq!(kernel.len(), 1, "lightlike metric has a 1-dim kernel");
        kernel[0].iter().map(|v| S::from_exact(v.clone())).collect()
    } else {
        let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| g[i][j].to_f64());
        let analysis = FloatAnalysis::new(m);
        let basis = analysis.kernel_basis(dim - 1);
        (0..dim).map(|r| S::from_f64_exact(basis[(r, 0)])).collect()
    };
    let pivot = argmax_magnitude(&x);
    let pivot_value = x[pivot].clone();
    for entry in &mut x {
        *entry = entry.clone() / pivot_value.clone();
    }
    Ok(x)
}

fn argmax_magnitude<S: Scalar>(values: &[S]) -> usize {
    let mut best = 0;
    let mut best_mag = values[0].magnitude();
    for (i, v) in values.iter().enumerate().skip(1) {
        let mag = v.magnitude();
        if mag > best_mag {
            best = i;
            best_mag = mag;
        }
    }
    best
}

/// Solves for the null covector and assembles the coframe split.
///
/// Unknowns are the covector components away from the pivot axis (the
/// largest component of `X`); the pivot component is eliminated through
/// `iota_X beta = 1`, which therefore holds exactly. Each kernel vector of
/// the (1,2) wedge map contributes `N` linear conditions: the fiber
/// components of the transversal contractions of `e_tilde ^ e^(N-4) ^ v`.
fn build_lightlike_data<S: Scalar>(
    n: usize,
    e: &FormField<S>,
    g: &[Vec<S>],
) -> CoframeResult<LightlikeData<S>> {
    let boundary_dim = n - 1;
    let x = null_direction(g)?;
    let pivot = argmax_magnitude(&x);

    // Kernel of the wedge map on (1,2)-forms. That map is onto for every
    // coframe (verified independently by the rank suite), so the float rank
    // can safely be pinned to the codomain dimension.
    let w12 = wedge_with_power_operator(e, n - 3, 1, 2)?;
    let w12_rank = RankPolicy::fixed(boundary_dim * n);
    let kernel = w12.kernel(&w12_rank)?;
    let kernel_fields: Vec<FormField<S>> =
        subspace_fields(&kernel, FormDegree::new(boundary_dim, n, 1, 2))?;

    let q = e.contract(&x)?;
    let q_comps = fiber_vector(&q);
    let e_pow = e.wedge_power(n.saturating_sub(4))?;

    // One (1,1)-form per boundary axis holding the contraction of the
    // coframe with X on that axis.
    let mut axis_forms = Vec::with_capacity(boundary_dim);
    for mu in 0..boundary_dim {
        let mut f = FormField::zero(e.degree());
        for (a, qa) in q_comps.iter().enumerate() {
            f.set(&[mu as u8], &[a as u8], qa.clone())?;
        }
        axis_forms.push(f);
    }

    // Transversal coordinate directions: every axis except the pivot.
    let contract_axes: Vec<usize> = (0..boundary_dim).filter(|&i| i != pivot).collect();
    let multi_contract = |field: &FormField<S>| -> CoframeResult<Vec<S>> {
        let mut current = field.clone();
        for &axis in &contract_axes {
            let mut unit = vec![S::zero(); boundary_dim];
            unit[axis] = S::one();
            current = current.contract(&unit)?;
        }
        Ok(fiber_vector_general(&current))
    };

    let mut rows: Vec<Vec<S>> = Vec::new();
    let mut rhs: Vec<S> = Vec::new();
    for v in &kernel_fields {
        let tail = e_pow.wedge(v)?;
        let full = multi_contract(&e.wedge(&tail)?)?;
        let mut axis_contractions = Vec::with_capacity(boundary_dim);
        for axis_form in &axis_forms {
            axis_contractions.push(multi_contract(&axis_form.wedge(&tail)?)?);
        }
        for component in 0..full.len() {
            let mut row = Vec::with_capacity(boundary_dim - 1);
            for &mu in contract_axes.iter() {
                let direct = axis_contractions[mu][component].clone();
                let through_pivot =
                    x[mu].clone() * axis_contractions[pivot][component].clone();
                row.push(direct - through_pivot);
            }
            rows.push(row);
            rhs.push(full[component].clone() - axis_contractions[pivot][component].clone());
        }
    }

    let gamma = solve_covector_system::<S>(&rows, &rhs, boundary_dim - 1)?;

    let mut beta = vec![S::zero(); boundary_dim];
    let mut pivot_component = S::one();
    for (slot, &mu) in contract_axes.iter().enumerate() {
        beta[mu] = gamma[slot].clone();
        pivot_component = pivot_component - gamma[slot].clone() * x[mu].clone();
    }
    beta[pivot] = pivot_component;

    let mut null_part = FormField::zero(e.degree());
    for (mu, beta_mu) in beta.iter().enumerate() {
        if beta_mu.is_zero() {
            continue;
        }
        for (a, qa) in q_comps.iter().enumerate() {
            null_part.set(&[mu as u8], &[a as u8], beta_mu.clone() * qa.clone())?;
        }
    }
    let reduced = e.sub(&null_part)?;
    let reduced_metric = minkowski_gram(&coframe_rows(&reduced), n);

    // Defect of the fixing condition on the computed split; exact mode must
    // come out identically zero.
    let mut residual = 0.0_f64;
    for v in &kernel_fields {
        let tail = e_pow.wedge(v)?;
        let defect = multi_contract(&reduced.wedge(&tail)?)?;
        for value in &defect {
            residual = residual.max(value.magnitude());
        }
    }
    debug_assert!(
        !S::EXACT || residual == 0.0,
        "exact covector fix must be exact, defect {residual:e}"
    );

    Ok(LightlikeData {
        null_direction: x,
        null_covector: beta,
        null_part,
        reduced_coframe: reduced,
        reduced_metric,
        completion_axes: contract_axes,
        covector_residual: residual,
    })
}

fn solve_covector_system<S: Scalar>(
    rows: &[Vec<S>],
    rhs: &[S],
    unknowns: usize,
) -> CoframeResult<Vec<S>> {
    if S::EXACT {
        let exact_rows: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_exact().expect("exact scalar")).collect())
            .collect();
        let exact_rhs: Vec<BigRational> = rhs
            .iter()
            .map(|x| x.to_exact().expect("exact scalar"))
            .collect();
        let elim = ExactElimination::with_solver(&exact_rows, unknowns);
        let solution = elim.solve(&exact_rhs).ok_or(CoframeError::CovectorFixing {
            residual: f64::INFINITY,
        })?;
        Ok(solution.into_iter().map(S::from_exact).collect())
    } else {
        let matrix =
            nalgebra::DMatrix::from_fn(rows.len(), unknowns, |r, c| rows[r][c].to_f64());
        let b = nalgebra::DVector::from_fn(rows.len(), |r, _| rhs[r].to_f64());
        let analysis = FloatAnalysis::new(matrix);
        let rank = analysis.rank(&RankPolicy::default())?;
        let (solution, residual) = analysis.solve_min_norm(&b, rank);
        if residual > COVECTOR_SOLVE_TOL * b.norm().max(1.0) {
            return Err(CoframeError::CovectorFixing { residual });
        }
        Ok(solution.iter().map(|v| S::from_f64_exact(*v)).collect())
    }
}

/// Reads all fiber components of a base-0-form of any internal degree.
fn fiber_vector_general<S: Scalar>(v: &FormField<S>) -> Vec<S> {
    debug_assert_eq!(v.degree().form, 0);
    v.coeffs().to_vec()
}
