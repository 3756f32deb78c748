//! Random and canonical boundary coframes.
//!
//! Random entries are dyadic rationals (`k/8` with `|k| <= 8`), which keeps
//! exact-mode arithmetic cheap while exploring a reasonable volume of
//! coframe space. Lightlike samples are produced by transporting an exactly
//! lightlike canonical coframe with a random boundary change of basis and a
//! random Lorentz rotation of the fiber; both preserve the signature class
//! exactly, so no post-hoc classification tweaks are needed.

use rand::Rng;

use crate::forms::{eta_sign, FormDegree, FormField};
use crate::linalg::{dense_determinant, dense_inverse, dense_mul, dense_transpose};
use crate::scalar::Scalar;

use super::{BoundaryCoframe, CoframeResult};

/// Determinant magnitude below which a random frame is resampled. Keeps
/// float-mode spectra comfortably away from spurious near-kernels.
const DET_MARGIN: f64 = 0.1;

/// Resampling cap; dyadic matrices fail the margin with probability far
/// below `1/cap`, so hitting it indicates a broken RNG, not bad luck.
const MAX_ATTEMPTS: usize = 10_000;

fn dyadic<S: Scalar>(rng: &mut impl Rng) -> S {
    S::ratio(rng.gen_range(-8..=8), 8)
}

fn dyadic_matrix<S: Scalar>(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vec<S>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| dyadic::<S>(rng)).collect())
        .collect()
}

fn identity_matrix<S: Scalar>(n: usize) -> Vec<Vec<S>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { S::one() } else { S::zero() })
                .collect()
        })
        .collect()
}

/// Minkowski Gram matrix of row vectors.
fn gram<S: Scalar>(rows: &[Vec<S>], fiber_dim: usize) -> Vec<Vec<S>> {
    rows.iter()
        .map(|ri| {
            rows.iter()
                .map(|rj| {
                    let mut acc = S::zero();
                    for a in 0..fiber_dim {
                        let term = ri[a].clone() * rj[a].clone();
                        acc = if eta_sign(a as u8, fiber_dim) < 0 {
                            acc - term
                        } else {
                            acc + term
                        };
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn build<S: Scalar>(
    n: usize,
    rows: Vec<Vec<S>>,
    transversal: Vec<S>,
) -> CoframeResult<BoundaryCoframe<S>> {
    let e = FormField::coframe_from_rows(n - 1, n, &rows)?;
    let e_n = FormField::from_coeffs(FormDegree::new(n - 1, n, 0, 1), transversal)?;
    BoundaryCoframe::new(e, e_n)
}

/// Samples a coframe whose boundary metric is nondegenerate (any signature)
/// with determinant margin, completed by a random transversal.
pub fn sample_nondegenerate<S: Scalar>(
    n: usize,
    rng: &mut impl Rng,
) -> CoframeResult<BoundaryCoframe<S>> {
    for _ in 0..MAX_ATTEMPTS {
        let rows = dyadic_matrix::<S>(rng, n - 1, n);
        let g = gram(&rows, n);
        if dense_determinant(&g).magnitude() <= DET_MARGIN {
            continue;
        }
        let mut frame = rows.clone();
        loop {
            let candidate: Vec<S> = (0..n).map(|_| dyadic::<S>(rng)).collect();
            frame.push(candidate.clone());
            if dense_determinant(&frame).magnitude() > DET_MARGIN {
                return build(n, rows, candidate);
            }
            frame.pop();
        }
    }
    unreachable!("nondegenerate sampling exceeded {MAX_ATTEMPTS} attempts");
}

/// Rows of the canonical lightlike coframe: the first `N-2` rows are fiber
/// unit vectors, the last boundary row is the null vector `u_{N-2} + u_{N-1}`
/// (one spacelike plus the timelike direction), and the transversal is the
/// complementary null vector `(u_{N-2} - u_{N-1})/2`, normalised so it pairs
/// to one with the null row.
pub fn canonical_rows<S: Scalar>(n: usize) -> (Vec<Vec<S>>, Vec<S>) {
    let mut rows = Vec::with_capacity(n - 1);
    for i in 0..n - 2 {
        let mut row = vec![S::zero(); n];
        row[i] = S::one();
        rows.push(row);
    }
    let mut null_row = vec![S::zero(); n];
    null_row[n - 2] = S::one();
    null_row[n - 1] = S::one();
    rows.push(null_row);
    let mut transversal = vec![S::zero(); n];
    transversal[n - 2] = S::ratio(1, 2);
    transversal[n - 1] = S::ratio(-1, 2);
    (rows, transversal)
}

/// The canonical lightlike coframe in bulk dimension `n`. Its boundary
/// metric is `diag(1, ..., 1, 0)`, the null direction is the last boundary
/// axis, and in its own frame basis the fiber Gram consists of a Euclidean
/// block plus a null 2x2 block pairing the null row with the transversal.
pub fn canonical_lightlike<S: Scalar>(n: usize) -> CoframeResult<BoundaryCoframe<S>> {
    let (rows, transversal) = canonical_rows::<S>(n);
    build(n, rows, transversal)
}

/// The canonical lightlike coframe with the null pair normalised to unit
/// Minkowski cross-pairing: last boundary row `(u_{N-2} + u_{N-1})/sqrt2`,
/// transversal `(u_{N-2} - u_{N-1})/sqrt2`. Same boundary metric and null
/// geometry as [`canonical_lightlike`]; the boundary metric is exactly
/// lightlike even in float mode because the null norms cancel identically.
pub fn canonical_lightlike_orthonormal<S: Scalar>(n: usize) -> CoframeResult<BoundaryCoframe<S>> {
    let (mut rows, mut transversal) = canonical_rows::<S>(n);
    let half_root = S::from_f64_exact(0.5_f64.sqrt());
    rows[n - 2][n - 2] = half_root.clone();
    rows[n - 2][n - 1] = half_root.clone();
    transversal[n - 2] = half_root.clone();
    transversal[n - 1] = S::zero() - half_root;
    build(n, rows, transversal)
}

/// A four-dimensional lightlike coframe whose reduced metric has a nonzero
/// off-diagonal entry (`g_{12} = 3/5` exactly, `0.3` in float mode). Used
/// by tests that need the induced metric to mix the spatial directions.
pub fn sheared_lightlike<S: Scalar>() -> CoframeResult<BoundaryCoframe<S>> {
    let (mut rows, transversal) = canonical_rows::<S>(4);
    rows[1] = if S::EXACT {
        vec![S::ratio(3, 5), S::ratio(4, 5), S::zero(), S::zero()]
    } else {
        vec![
            S::from_f64_exact(0.3),
            S::from_f64_exact(0.91_f64.sqrt()),
            S::zero(),
            S::zero(),
        ]
    };
    build(4, rows, transversal)
}

/// The identity boundary coframe: `e_mu = u_mu`, transversal the timelike
/// unit vector. Boundary metric is the Euclidean identity.
pub fn identity_coframe<S: Scalar>(n: usize) -> CoframeResult<BoundaryCoframe<S>> {
    let mut rows = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let mut row = vec![S::zero(); n];
        row[i] = S::one();
        rows.push(row);
    }
    let mut transversal = vec![S::zero(); n];
    transversal[n - 1] = S::one();
    build(n, rows, transversal)
}

/// Random special Lorentz transformation of the fiber via the Cayley map:
/// `L = (I - A)(I + A)^{-1}` with `A = eta K`, `K` random antisymmetric.
/// Exactly eta-orthogonal for every scalar mode.
fn random_lorentz<S: Scalar>(n: usize, rng: &mut impl Rng) -> Vec<Vec<S>> {
    for _ in 0..MAX_ATTEMPTS {
        let mut a = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let value: S = dyadic(rng);
                let sign_i = eta_sign(i as u8, n);
                let sign_j = eta_sign(j as u8, n);
                a[i][j] = if sign_i < 0 {
                    S::zero() - value.clone()
                } else {
                    value.clone()
                };
                a[j][i] = if sign_j < 0 { value } else { S::zero() - value };
            }
        }
        let mut plus = identity_matrix::<S>(n);
        let mut minus = identity_matrix::<S>(n);
        for i in 0..n {
            for j in 0..n {
                plus[i][j] = plus[i][j].clone() + a[i][j].clone();
                minus[i][j] = minus[i][j].clone() - a[i][j].clone();
            }
        }
        if let Some(inverse) = dense_inverse(&plus) {
            return dense_mul(&minus, &inverse);
        }
    }
    unreachable!("Cayley sampling exceeded {MAX_ATTEMPTS} attempts");
}

/// Random invertible dyadic matrix with determinant margin.
fn random_gl<S: Scalar>(n: usize, rng: &mut impl Rng) -> Vec<Vec<S>> {
    for _ in 0..MAX_ATTEMPTS {
        let m = dyadic_matrix::<S>(rng, n, n);
        if dense_determinant(&m).magnitude() > DET_MARGIN {
            return m;
        }
    }
    unreachable!("GL sampling exceeded {MAX_ATTEMPTS} attempts");
}

/// Samples a lightlike coframe by transporting the canonical one: a random
/// boundary change of basis mixes the rows and a random Lorentz rotation
/// moves the fiber, so the boundary metric stays exactly lightlike.
pub fn sample_lightlike<S: Scalar>(
    n: usize,
    rng: &mut impl Rng,
) -> CoframeResult<BoundaryCoframe<S>> {
    let (rows0, transversal0) = canonical_rows::<S>(n);
    let base_change = random_gl::<S>(n - 1, rng);
    let lorentz_t = dense_transpose(&random_lorentz::<S>(n, rng));
    let rotated = dense_mul(&rows0, &lorentz_t);
    let rows = dense_mul(&base_change, &rotated);
    let transversal = dense_mul(&[transversal0], &lorentz_t).pop().expect("one row");
    build(n, rows, transversal)
}
