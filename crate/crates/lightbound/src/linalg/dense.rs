//! Tiny dense-matrix helpers generic over the scalar type.
//!
//! The operator machinery stores matrices per numeric mode; these helpers
//! cover the handful of places that need a small inverse, determinant, or
//! product for either scalar without round-tripping through a mode-tagged
//! operator: frame matrices, fiber changes of basis, and Cayley transforms.
//! Pivots are chosen by magnitude; in float mode an entry is treated as zero
//! below `FLOAT_PIVOT_TOL` relative to the largest initial entry, while in
//! exact mode only a true zero is a zero.

use crate::scalar::Scalar;

const FLOAT_PIVOT_TOL: f64 = 1e-12;

fn pivot_threshold<S: Scalar>(rows: &[Vec<S>]) -> f64 {
    if S::EXACT {
        return 0.0;
    }
    let scale = rows
        .iter()
        .flatten()
        .map(Scalar::magnitude)
        .fold(0.0_f64, f64::max);
    FLOAT_PIVOT_TOL * scale.max(1.0)
}

fn is_effectively_zero<S: Scalar>(value: &S, threshold: f64) -> bool {
    if S::EXACT {
        value.is_zero()
    } else {
        value.magnitude() <= threshold
    }
}

/// Row-major matrix product `a · b`.
pub fn dense_mul<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> Vec<Vec<S>> {
    let inner = if a.is_empty() { 0 } else { a[0].len() };
    debug_assert!(b.len() == inner);
    let cols = if b.is_empty() { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = S::zero();
                    for (k, ak) in row.iter().enumerate() {
                        acc = acc + ak.clone() * b[k][j].clone();
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Transpose of a row-major matrix.
pub fn dense_transpose<S: Scalar>(m: &[Vec<S>]) -> Vec<Vec<S>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    (0..cols)
        .map(|j| (0..rows).map(|i| m[i][j].clone()).collect())
        .collect()
}

/// Determinant by Gauss elimination with magnitude pivoting. Returns zero
/// when a pivot cannot be found.
pub fn dense_determinant<S: Scalar>(rows: &[Vec<S>]) -> S {
    let n = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    let threshold = pivot_threshold(rows);
    let mut work: Vec<Vec<S>> = rows.to_vec();
    let mut det = S::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .filter(|&r| !is_effectively_zero(&work[r][col], threshold))
            .max_by(|&a, &b| {
                work[a][col]
                    .magnitude()
                    .partial_cmp(&work[b][col].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(pivot_row) = pivot_row else {
            return S::zero();
        };
        if pivot_row != col {
            work.swap(pivot_row, col);
            det = det.neg();
        }
        let pivot = work[col][col].clone();
        det = det * pivot.clone();
        for r in col + 1..n {
            if work[r][col].is_zero() {
                continue;
            }
            let factor = work[r][col].clone() / pivot.clone();
            for c in col..n {
                let delta = factor.clone() * work[col][c].clone();
                work[r][c] = work[r][c].clone() - delta;
            }
        }
    }
    det
}

/// Rank by Gauss elimination with magnitude pivoting.
pub fn dense_rank<S: Scalar>(rows: &[Vec<S>]) -> usize {
    let nrows = rows.len();
    let ncols = if nrows == 0 { 0 } else { rows[0].len() };
    let threshold = pivot_threshold(rows);
    let mut work: Vec<Vec<S>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let pivot_row = (rank..nrows)
            .filter(|&r| !is_effectively_zero(&work[r][col], threshold))
            .max_by(|&a, &b| {
                work[a][col]
                    .magnitude()
                    .partial_cmp(&work[b][col].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(pivot_row) = pivot_row else {
            continue;
        };
        work.swap(pivot_row, rank);
        let pivot = work[rank][col].clone();
        for r in rank + 1..nrows {
            if work[r][col].is_zero() {
                continue;
            }
            let factor = work[r][col].clone() / pivot.clone();
            for c in col..ncols {
                let delta = factor.clone() * work[rank][c].clone();
                work[r][c] = work[r][c].clone() - delta;
            }
        }
        rank += 1;
    }
    rank
}

/// Inverse by Gauss-Jordan elimination; `None` when singular.
pub fn dense_inverse<S: Scalar>(rows: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    let threshold = pivot_threshold(rows);
    let mut work: Vec<Vec<S>> = rows.to_vec();
    let mut inv: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { S::one() } else { S::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .filter(|&r| !is_effectively_zero(&work[r][col], threshold))
            .max_by(|&a, &b| {
                work[a][col]
                    .magnitude()
                    .partial_cmp(&work[b][col].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
        work.swap(pivot_row, col);
        inv.swap(pivot_row, col);
        let pivot = work[col][col].clone();
        for c in 0..n {
            work[col][c] = work[col][c].clone() / pivot.clone();
            inv[col][c] = inv[col][c].clone() / pivot.clone();
        }
        for r in 0..n {
            if r == col || work[r][col].is_zero() {
                continue;
            }
            let factor = work[r][col].clone();
            for c in 0..n {
                let dw = factor.clone() * work[col][c].clone();
                work[r][c] = work[r][c].clone() - dw;
                let di = factor.clone() * inv[col][c].clone();
                inv[r][c] = inv[r][c].clone() - di;
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;
    use num::Zero;

    fn rat(n: i64, d: i64) -> BigRational {
        <BigRational as Scalar>::ratio(n, d)
    }

    #[test]
    fn exact_inverse_round_trips() {
        let m = vec![
            vec![rat(1, 1), rat(2, 1), rat(0, 1)],
            vec![rat(0, 1), rat(1, 3), rat(1, 1)],
            vec![rat(5, 2), rat(0, 1), rat(1, 1)],
        ];
        let inv = dense_inverse(&m).expect("invertible");
        let product = dense_mul(&m, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { rat(1, 1) } else { rat(0, 1) };
                assert_eq!(product[i][j], expected);
            }
        }
    }

    #[test]
    fn singular_matrix_has_no_inverse_and_zero_determinant() {
        let m = vec![
            vec![rat(1, 1), rat(2, 1)],
            vec![rat(2, 1), rat(4, 1)],
        ];
        assert!(dense_inverse(&m).is_none());
        assert!(dense_determinant(&m).is_zero());
        assert_eq!(dense_rank(&m), 1);
    }

    #[test]
    fn float_determinant_matches_cofactor_expansion() {
        let m = vec![
            vec![2.0_f64, -1.0, 0.5],
            vec![1.0, 3.0, -2.0],
            vec![0.0, 1.5, 1.0],
        ];
        // Cofactor expansion along the first row.
        let expected = 2.0 * (3.0 * 1.0 - (-2.0) * 1.5) - (-1.0) * (1.0 * 1.0 - (-2.0) * 0.0)
            + 0.5 * (1.0 * 1.5 - 3.0 * 0.0);
        let det = dense_determinant(&m);
        assert!((det - expected).abs() < 1e-12, "det {det} vs {expected}");
    }

    #[test]
    fn transpose_and_product_shapes() {
        let a = vec![vec![1.0_f64, 2.0, 3.0]];
        let at = dense_transpose(&a);
        assert_eq!(at.len(), 3);
        assert_eq!(at[0], vec![1.0]);
        let square = dense_mul(&at, &a);
        assert_eq!(square.len(), 3);
        assert_eq!(square[2][2], 9.0);
    }
}
