//! Closed-form component equations for the kernel and multiplier spaces,
//! and the induced solve `sigma = W^{-1}([tau, e])`.
//!
//! All component equations are stated in the frame basis, where the coframe
//! itself has identity components. Equations involving only wedge maps are
//! then universal (the same for every coframe); equations involving the
//! reduced coframe additionally assume adapted coordinates, i.e. the null
//! direction is the last boundary axis and the fixed covector is the dual
//! coordinate one-form. The canonical lightlike fixtures satisfy both.
//!
//! The relative signs inside the pairing relations were pinned against
//! numerically computed kernels (exact arithmetic) over several fixtures;
//! the test suite keeps re-checking them on every run.

use std::marker::PhantomData;

use crate::forms::{subset_unrank, FormDegree, FormField};
use crate::linalg::{dense_rank, LinearOperator, RankPolicy};
use crate::scalar::Scalar;

use super::{wedge_with_power_operator, BoundaryCoframe, CoframeError, CoframeResult};

/// Relative residual above which `[tau, e]` is declared outside the image
/// of the wedge map in float mode; the membership is exact in theory.
const BRACKET_SOLVE_TOL: f64 = 1e-8;

/// All strictly increasing `size`-subsets of `ground` (itself increasing).
fn subsets(ground: &[u8], size: usize) -> Vec<Vec<u8>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    if ground.len() < size {
        return Vec::new();
    }
    let mut out = Vec::new();
    let head = ground[0];
    for mut tail in subsets(&ground[1..], size - 1) {
        tail.insert(0, head);
        out.push(tail);
    }
    out.extend(subsets(&ground[1..], size));
    out
}

/// Residuals of the component equations cutting out the kernel of
/// `e^{N-3} ^ .` on (1,2)-forms, evaluated on `field` in the frame basis.
///
/// The wedge map has identity-coframe components in the frame basis, so
/// these equations characterise the kernel for every coframe, lightlike or
/// not. Indices: boundary fiber rows `0..N-2`, transversal row `N-1`.
/// Three families: vanishing mixed components `v_i^{j, n}` for `i != j`;
/// equal partial traces against the transversal column; equal partial
/// traces within the boundary block. The residual count equals the
/// codomain dimension `(N-1)N`.
pub fn kernel_equation_residuals<S: Scalar>(
    coframe: &BoundaryCoframe<S>,
    field: &FormField<S>,
) -> CoframeResult<Vec<S>> {
    let n = coframe.bulk_dimension();
    let hat = coframe.express_in_frame(field)?;
    let last = (n - 1) as u8;
    let mut residuals = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            if i != j {
                residuals.push(hat.coeff_signed(&[i as u8], &[j as u8, last])?);
            }
        }
    }
    for j in 0..n - 1 {
        let mut acc = S::zero();
        for i in 0..n - 1 {
            if i != j {
                acc = acc + hat.coeff_signed(&[i as u8], &[i as u8, last])?;
            }
        }
        residuals.push(acc);
    }
    for j in 0..n - 1 {
        let mut acc = S::zero();
        for i in 0..n - 1 {
            if i != j {
                acc = acc + hat.coeff_signed(&[i as u8], &[i as u8, j as u8])?;
            }
        }
        residuals.push(acc);
    }
    Ok(residuals)
}

/// Residuals of the component equations cutting out the multiplier space
/// on `(N-3, N-1)`-forms, in the frame basis of an adapted coframe with
/// orthonormal reduced block (the canonical fixtures).
///
/// Families, writing `t` for the transversal fiber row `N-1`, `l` for the
/// null row `N-2`, and spatial for `0..N-3`:
/// 1. components whose base multi-index contains the null base axis vanish;
/// 2. components with fiber set `{t} ∪ spatial` vanish;
/// 3. components with fiber set `{l} ∪ spatial` vanish;
/// 4. partial traces against `{t, k}` fiber pairs vanish for every boundary
///    row `k`;
/// 5. swapping one base index into the fiber slot across `{t, l}` leaves
///    the signed component unchanged.
pub fn multiplier_equation_residuals<S: Scalar>(
    coframe: &BoundaryCoframe<S>,
    field: &FormField<S>,
) -> CoframeResult<Vec<S>> {
    let n = coframe.bulk_dimension();
    let hat = coframe.express_in_frame(field)?;
    let transversal = (n - 1) as u8;
    let null_base = (n - 2) as u8;
    let boundary: Vec<u8> = (0..(n - 1) as u8).collect();
    let spatial: Vec<u8> = (0..(n - 2) as u8).collect();
    let mut residuals = Vec::new();

    // Family 1: base contains the null axis; all fiber components.
    let fiber_count = FormDegree::new(n - 1, n, n - 3, n - 1).fiber_count();
    for rest in subsets(&spatial, n - 4) {
        let mut base = rest.clone();
        base.push(null_base);
        for rank in 0..fiber_count {
            let fiber = subset_unrank(n, n - 1, rank);
            residuals.push(hat.coeff(&base, &fiber)?);
        }
    }

    // Families 2 and 3: fiber = all spatial rows plus one null-pair row.
    for extra in [transversal, null_base] {
        let mut fiber = spatial.clone();
        fiber.push(extra);
        for base in subsets(&spatial, n - 3) {
            residuals.push(hat.coeff(&base, &fiber)?);
        }
    }

    // Family 4: for each boundary row k, the trace of components whose
    // fiber is {t, k} plus the base indices.
    for &k in &boundary {
        let ground: Vec<u8> = boundary.iter().copied().filter(|&i| i != k).collect();
        let mut acc = S::zero();
        for base in subsets(&ground, n - 3) {
            let mut fiber = vec![transversal, k];
            fiber.extend_from_slice(&base);
            acc = acc + hat.coeff_signed(&base, &fiber)?;
        }
        residuals.push(acc);
    }

    // Family 5: for a spatial core C and two spatial indices p < q outside
    // it, the {t, l}-components with (base C+p, fiber tail q) and
    // (base C+q, fiber tail p) agree.
    for core in subsets(&spatial, n.saturating_sub(4)) {
        let left: Vec<u8> = spatial
            .iter()
            .copied()
            .filter(|i| !core.contains(i))
            .collect();
        for pair in subsets(&left, 2) {
            let (p, q) = (pair[0], pair[1]);
            let mut base_p = core.clone();
            base_p.push(p);
            let mut base_q = core.clone();
            base_q.push(q);
            let mut fiber_q = vec![transversal, null_base];
            fiber_q.extend_from_slice(&core);
            fiber_q.push(q);
            let mut fiber_p = vec![transversal, null_base];
            fiber_p.extend_from_slice(&core);
            fiber_p.push(p);
            let first = hat.coeff_signed(&base_p, &fiber_q)?;
            let second = hat.coeff_signed(&base_q, &fiber_p)?;
            residuals.push(first - second);
        }
    }

    Ok(residuals)
}

/// Residuals of the four-dimensional multiplier equations for a general
/// adapted lightlike coframe, including the metric-weighted pairing
/// relation. Requires `N = 4` and a nonvanishing first metric diagonal
/// (otherwise the coordinates are not adapted to the construction).
///
/// In frame components (base 1..3, fiber 1..4 with 4 the transversal):
/// all `tau_3` components vanish; `tau_a^{123} = tau_a^{124} = 0` for
/// `a = 1, 2`; `tau_1^{134} + tau_2^{234} = 0`; and
/// `g_11 tau_2^{134} - (g_12 + g_21) tau_1^{134} - g_22 tau_1^{234} = 0`.
pub fn multiplier_equation_residuals_dim4<S: Scalar>(
    coframe: &BoundaryCoframe<S>,
    field: &FormField<S>,
) -> CoframeResult<Vec<S>> {
    let n = coframe.bulk_dimension();
    if n != 4 {
        return Err(CoframeError::DimensionNotFour { got: n });
    }
    let g = coframe.boundary_metric();
    let scale = g
        .iter()
        .flatten()
        .map(|v| v.magnitude())
        .fold(0.0_f64, f64::max);
    if g[0][0].magnitude() <= 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(CoframeError::NotAdapted {
            detail: "first diagonal entry of the boundary metric vanishes".into(),
        });
    }
    let hat = coframe.express_in_frame(field)?;
    let mut residuals = Vec::new();
    // Null base row vanishes entirely.
    for rank in 0..4 {
        let fiber = subset_unrank(4, 3, rank);
        residuals.push(hat.coeff(&[2], &fiber)?);
    }
    // Purely spatial-and-null fiber triples vanish on spatial base rows.
    for alpha in 0..2u8 {
        residuals.push(hat.coeff(&[alpha], &[0, 1, 2])?);
        residuals.push(hat.coeff(&[alpha], &[0, 1, 3])?);
    }
    let t1_134 = hat.coeff(&[0], &[0, 2, 3])?;
    let t1_234 = hat.coeff(&[0], &[1, 2, 3])?;
    let t2_134 = hat.coeff(&[1], &[0, 2, 3])?;
    let t2_234 = hat.coeff(&[1], &[1, 2, 3])?;
    residuals.push(t1_134.clone() + t2_234);
    let cross = g[0][1].clone() + g[1][0].clone();
    residuals.push(g[0][0].clone() * t2_134 - cross * t1_134 - g[1][1].clone() * t1_234);
    Ok(residuals)
}

/// Solves `e^{N-3} ^ sigma = [tau, e]` for the unique (1,1)-form `sigma`.
///
/// The wedge map on (1,1)-forms is injective, and `[tau, e]` lies in its
/// image whenever `tau` belongs to the multiplier space; outside the image
/// the solve reports the defect instead of a spurious least-squares answer.
pub struct WedgeBracketInverter<S: Scalar> {
    coframe: FormField<S>,
    operator: LinearOperator,
    domain: FormDegree,
    _marker: PhantomData<S>,
}

impl<S: Scalar> WedgeBracketInverter<S> {
    pub fn new(coframe: &BoundaryCoframe<S>) -> CoframeResult<Self> {
        let n = coframe.bulk_dimension();
        let operator = wedge_with_power_operator(coframe.coframe(), n - 3, 1, 1)?;
        let domain = FormDegree::new(n - 1, n, 1, 1);
        Ok(Self {
            coframe: coframe.coframe().clone(),
            operator,
            domain,
            _marker: PhantomData,
        })
    }

    /// Applies `tau -> W^{-1}([tau, e])`.
    pub fn apply(&self, tau: &FormField<S>) -> CoframeResult<FormField<S>> {
        let bracket = tau.rho_action(&self.coframe)?;
        let solution: Vec<S> = if S::EXACT {
            let rhs: Vec<_> = bracket
                .coeffs()
                .iter()
                .map(|v| v.to_exact().expect("exact scalar"))
                .collect();
            self.operator
                .solve_exact(&rhs)?
                .into_iter()
                .map(S::from_exact)
                .collect()
        } else {
            let rhs: Vec<f64> = bracket.coeffs().iter().map(|v| v.to_f64()).collect();
            let policy = RankPolicy::fixed(self.domain.components());
            self.operator
                .solve_float(&rhs, &policy, BRACKET_SOLVE_TOL)?
                .into_iter()
                .map(S::from_f64_exact)
                .collect()
        };
        Ok(FormField::from_coeffs(self.domain, solution)?)
    }
}

/// Trace of a (1,1)-form in the frame basis: the sum of the diagonal
/// components over all boundary rows. Vanishes on every
/// `W^{-1}([tau, e])` with `tau` in the multiplier space, for any coframe.
pub fn frame_trace<S: Scalar>(
    coframe: &BoundaryCoframe<S>,
    field: &FormField<S>,
) -> CoframeResult<S> {
    let n = coframe.bulk_dimension();
    let hat = coframe.express_in_frame(field)?;
    let mut acc = S::zero();
    for mu in 0..(n - 1) as u8 {
        acc = acc + hat.coeff(&[mu], &[mu])?;
    }
    Ok(acc)
}

/// Residuals of the full component pattern of `sigma = W^{-1}([tau, e])`
/// in the frame basis of an adapted coframe: the spatial block is
/// symmetric once the fiber index is lowered with the boundary metric,
/// the mixed-component spatial trace vanishes, and the null row, null
/// column, and transversal column vanish. The residual count cuts the
/// component space down to exactly the multiplier dimension.
pub fn sigma_pattern_residuals<S: Scalar>(
    coframe: &BoundaryCoframe<S>,
    sigma: &FormField<S>,
) -> CoframeResult<Vec<S>> {
    let n = coframe.bulk_dimension();
    let g = coframe.boundary_metric();
    let hat = coframe.express_in_frame(sigma)?;
    let last_base = (n - 2) as u8;
    let transversal = (n - 1) as u8;
    let mut residuals = Vec::new();
    // Lowered spatial block symmetric, mixed diagonal traceless.
    let mut trace = S::zero();
    for mu in 0..last_base {
        for nu in mu + 1..last_base {
            let mut skew = S::zero();
            for rho in 0..(n - 1) as u8 {
                let lower_mu = hat.coeff(&[mu], &[rho])? * g[rho as usize][nu as usize].clone();
                let lower_nu = hat.coeff(&[nu], &[rho])? * g[rho as usize][mu as usize].clone();
                skew = skew + lower_mu - lower_nu;
            }
            residuals.push(skew);
        }
        trace = trace + hat.coeff(&[mu], &[mu])?;
    }
    residuals.push(trace);
    // Null row, null column, transversal column vanish.
    for a in 0..n as u8 {
        residuals.push(hat.coeff(&[last_base], &[a])?);
    }
    for mu in 0..last_base {
        residuals.push(hat.coeff(&[mu], &[last_base])?);
        residuals.push(hat.coeff(&[mu], &[transversal])?);
    }
    Ok(residuals)
}

/// Rank of the pairing matrix `top(left_i ^ right_j)` between two families
/// of fields whose degrees are complementary. Full rank certifies that the
/// wedge pairing between the two spaces is nondegenerate.
pub fn wedge_pairing_rank<S: Scalar>(
    left: &[FormField<S>],
    right: &[FormField<S>],
) -> CoframeResult<usize> {
    let mut matrix = Vec::with_capacity(left.len());
    for l in left {
        let mut row = Vec::with_capacity(right.len());
        for r in right {
            row.push(l.wedge(r)?.top_coefficient()?);
        }
        matrix.push(row);
    }
    Ok(dense_rank(&matrix))
}
