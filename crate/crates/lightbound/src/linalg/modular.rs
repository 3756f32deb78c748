//! Modular full-rank certificates.
//!
//! Elimination modulo a prime can only lower the rank of an integer matrix:
//! a pivot structure of size `r` found mod `p` exhibits an `r x r` minor
//! that is nonzero mod `p`, hence nonzero over the rationals. When `r`
//! equals the smaller matrix dimension this *certifies* full rank — the only
//! case this module answers. Rank-deficient matrices fall back to the exact
//! elimination, which is cheap precisely because it stops after `rank`
//! steps.

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer};

/// A prime just below `2^62`, so products of residues fit in `u128`.
const PRIME: u64 = 4_611_686_018_427_387_847;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(PRIME)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64) -> u64 {
    pow_mod(a, PRIME - 2)
}

fn rational_mod(x: &BigRational) -> Option<u64> {
    let p = BigInt::from(PRIME);
    let num = x.numer().mod_floor(&p);
    let den = x.denom().mod_floor(&p);
    let den64 = match den.to_u64_digits() {
        (Sign::NoSign, _) => return None, // denominator divisible by p
        (_, digits) => digits.first().copied().unwrap_or(0),
    };
    if den64 == 0 {
        return None;
    }
    let num64 = match num.to_u64_digits() {
        (Sign::NoSign, _) => 0,
        (_, digits) => digits.first().copied().unwrap_or(0),
    };
    Some(mul_mod(num64, inv_mod(den64)))
}

/// Rank of the matrix modulo the fixed prime, or `None` if an entry's
/// denominator is divisible by the prime (practically impossible for the
/// dyadic data used here, but handled).
pub fn modular_rank(rows: &[Vec<BigRational>], cols: usize) -> Option<usize> {
    let mut work: Vec<Vec<u64>> = Vec::with_capacity(rows.len());
    for row in rows {
        let converted: Option<Vec<u64>> = row.iter().map(rational_mod).collect();
        work.push(converted?);
    }
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pivot_row) = (rank..work.len()).find(|&r| work[r][col] != 0) else {
            continue;
        };
        work.swap(rank, pivot_row);
        let inv = inv_mod(work[rank][col]);
        for r in (rank + 1)..work.len() {
            if work[r][col] == 0 {
                continue;
            }
            let factor = mul_mod(work[r][col], inv);
            for c in col..cols {
                let sub = mul_mod(factor, work[rank][c]);
                work[r][c] = (work[r][c] + PRIME - sub) % PRIME;
            }
        }
        rank += 1;
        if rank == work.len() {
            break;
        }
    }
    Some(rank)
}

/// `Some(min(rows, cols))` when the matrix is certified to have full rank
/// over the rationals; `None` when the certificate does not apply (the
/// matrix may or may not be full rank).
pub fn certified_full_rank(rows: &[Vec<BigRational>], cols: usize) -> Option<usize> {
    let min_dim = rows.len().min(cols);
    match modular_rank(rows, cols) {
        Some(rank) if rank == min_dim => Some(min_dim),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn rat(n: i64, d: i64) -> BigRational {
        <BigRational as Scalar>::ratio(n, d)
    }

    #[test]
    fn full_rank_is_certified_and_deficiency_is_declined() {
        let full = vec![
            vec![rat(1, 2), rat(1, 3)],
            vec![rat(0, 1), rat(5, 7)],
        ];
        assert_eq!(certified_full_rank(&full, 2), Some(2));

        let deficient = vec![
            vec![rat(1, 1), rat(2, 1)],
            vec![rat(2, 1), rat(4, 1)],
        ];
        assert_eq!(certified_full_rank(&deficient, 2), None);
        assert_eq!(modular_rank(&deficient, 2), Some(1));

        // Wide full-row-rank matrix.
        let wide = vec![vec![rat(1, 1), rat(0, 1), rat(3, 1)]];
        assert_eq!(certified_full_rank(&wide, 3), Some(1));
    }

    #[test]
    fn huge_entries_reduce_correctly() {
        let big = BigInt::from(PRIME) * BigInt::from(7) + BigInt::from(3);
        let rows = vec![vec![BigRational::from_integer(big)]];
        assert_eq!(modular_rank(&rows, 1), Some(1));
        let divisible = vec![vec![BigRational::from_integer(BigInt::from(PRIME))]];
        assert_eq!(modular_rank(&divisible, 1), Some(0));
    }
}
