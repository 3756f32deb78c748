//! Scalar abstraction shared by the exact-rational and floating-point paths.
//!
//! Every algebraic layer (forms, operators, subspaces) is generic over
//! [`Scalar`] so that the same code produces certified integer answers over
//! `BigRational` and fast approximate answers over `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, FromPrimitive, ToPrimitive};

/// Field of coefficients for forms and linear maps.
///
/// `EXACT` distinguishes the rational path (pivoting may pick any nonzero
/// entry, comparisons are decidable) from the float path (rank decisions go
/// through the SVD policy instead of elimination).
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + num::Zero
    + num::One
{
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// Exact embedding of a binary float. For rationals this is the dyadic
    /// value the float denotes, so float and rational runs can share inputs
    /// bit-for-bit.
    fn from_f64_exact(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// The exact rational value, when this scalar type carries one.
    fn to_exact(&self) -> Option<BigRational>;

    /// Conversion from an exact rational (lossy only for float scalars).
    fn from_exact(value: BigRational) -> Self;

    /// Ratio constructor, mainly for fixtures and tests.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    /// Approximate magnitude, used only to pick pivots (never to decide rank
    /// on the exact path).
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_f64_exact(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_exact(&self) -> Option<BigRational> {
        None
    }

    fn from_exact(value: BigRational) -> Self {
        Scalar::to_f64(&value)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_f64_exact(x: f64) -> Self {
        BigRational::from_f64(x).expect("finite float required for exact embedding")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_exact(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn from_exact(value: BigRational) -> Self {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_floats_embed_exactly() {
        let x = 0.015625_f64; // 1/64
        let r = BigRational::from_f64_exact(x);
        assert_eq!(r, <BigRational as Scalar>::ratio(1, 64));
        assert_eq!(Scalar::to_f64(&r), x);
    }

    #[test]
    fn ratio_round_trips_through_f64_for_dyadics() {
        for num in [-63_i64, -1, 0, 1, 5, 63] {
            let r = <BigRational as Scalar>::ratio(num, 32);
            let back = BigRational::from_f64_exact(Scalar::to_f64(&r));
            assert_eq!(r, back);
        }
    }
}
