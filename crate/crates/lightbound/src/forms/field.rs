//! Pointwise vector-valued forms and their algebraic operations.

use num::Zero;

use super::degree::FormDegree;
use super::index::{merge_sign, merged, sort_signed, subset_rank, subset_unrank};
use super::{eta_sign, FormError, FormResult};
use crate::scalar::Scalar;

/// A single vector-valued form at a point: coefficients over all pairs of
/// strictly increasing base and fiber multi-indices, flat-indexed as
/// `base_rank * fiber_count + fiber_rank`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField<S: Scalar> {
    degree: FormDegree,
    coeffs: Vec<S>,
}

impl<S: Scalar> FormField<S> {
    pub fn zero(degree: FormDegree) -> Self {
        Self {
            coeffs: vec![S::zero(); degree.components()],
            degree,
        }
    }

    /// The unit of the wedge algebra: the constant scalar 1 in degree (0,0).
    pub fn one(base_dim: usize, fiber_dim: usize) -> Self {
        let mut unit = Self::zero(FormDegree::new(base_dim, fiber_dim, 0, 0));
        unit.coeffs[0] = S::one();
        unit
    }

    /// Basis monomial with unit coefficient on the given flat rank.
    pub fn basis(degree: FormDegree, flat: usize) -> Self {
        let mut field = Self::zero(degree);
        field.coeffs[flat] = S::one();
        field
    }

    pub fn from_coeffs(degree: FormDegree, coeffs: Vec<S>) -> FormResult<Self> {
        if coeffs.len() != degree.components() {
            return Err(FormError::DegreeMismatch {
                expected: degree,
                got: degree,
            });
        }
        Ok(Self { degree, coeffs })
    }

    pub fn degree(&self) -> FormDegree {
        self.degree
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [S] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn flat_rank(&self, base: &[u8], fiber: &[u8]) -> FormResult<usize> {
        if base.len() != self.degree.form
            || fiber.len() != self.degree.internal
            || base.iter().any(|&b| usize::from(b) >= self.degree.base_dim)
            || fiber.iter().any(|&f| usize::from(f) >= self.degree.fiber_dim)
        {
            let mut index = base.to_vec();
            index.extend_from_slice(fiber);
            return Err(FormError::IndexOutOfRange {
                degree: self.degree,
                index,
            });
        }
        let base_rank = subset_rank(self.degree.base_dim, base);
        let fiber_rank = subset_rank(self.degree.fiber_dim, fiber);
        Ok(self.degree.flat(base_rank, fiber_rank))
    }

    /// Coefficient on a pair of strictly increasing multi-indices.
    pub fn coeff(&self, base: &[u8], fiber: &[u8]) -> FormResult<S> {
        Ok(self.coeffs[self.flat_rank(base, fiber)?].clone())
    }

    /// Coefficient on arbitrarily ordered index lists, with the
    /// antisymmetry sign applied; zero if an index repeats.
    pub fn coeff_signed(&self, base: &[u8], fiber: &[u8]) -> FormResult<S> {
        let (Some((sb, sign_b)), Some((sf, sign_f))) = (sort_signed(base), sort_signed(fiber))
        else {
            return Ok(S::zero());
        };
        let value = self.coeff(&sb, &sf)?;
        Ok(if sign_b * sign_f == 1 { value } else { -value })
    }

    pub fn set(&mut self, base: &[u8], fiber: &[u8], value: S) -> FormResult<()> {
        let flat = self.flat_rank(base, fiber)?;
        self.coeffs[flat] = value;
        Ok(())
    }

    /// Adds `value` on arbitrarily ordered index lists, with the
    /// antisymmetry sign applied; a repeated index contributes nothing.
    pub fn accumulate_signed(&mut self, base: &[u8], fiber: &[u8], value: S) -> FormResult<()> {
        let (Some((sb, sign_b)), Some((sf, sign_f))) = (sort_signed(base), sort_signed(fiber))
        else {
            return Ok(());
        };
        let flat = self.flat_rank(&sb, &sf)?;
        let signed = if sign_b * sign_f == 1 { value } else { -value };
        self.coeffs[flat] = self.coeffs[flat].clone() + signed;
        Ok(())
    }

    /// Iterates `(base multi-index, fiber multi-index, coefficient)` over all
    /// nonzero components.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<u8>, Vec<u8>, &S)> + '_ {
        let fiber_count = self.degree.fiber_count();
        self.coeffs.iter().enumerate().filter_map(move |(flat, c)| {
            if c.is_zero() {
                return None;
            }
            let base = subset_unrank(self.degree.base_dim, self.degree.form, flat / fiber_count);
            let fiber =
                subset_unrank(self.degree.fiber_dim, self.degree.internal, flat % fiber_count);
            Some((base, fiber, c))
        })
    }

    fn check_same_degree(&self, other: &Self) -> FormResult<()> {
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> FormResult<Self> {
        self.check_same_degree(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(Self {
            degree: self.degree,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> FormResult<Self> {
        self.check_same_degree(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(Self {
            degree: self.degree,
            coeffs,
        })
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.clone() * factor.clone())
                .collect(),
        }
    }

    pub fn negate(&self) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    /// Graded wedge product. On basis monomials the coefficient is the merge
    /// sign of the base indices times the merge sign of the fiber indices,
    /// times the Koszul factor `(-1)^{internal(left) * total(right)}`; this
    /// makes the product associative and graded-commutative with respect to
    /// total degree, with no combinatorial prefactors.
    pub fn wedge(&self, other: &Self) -> FormResult<Self> {
        if !self.degree.same_spaces(&other.degree) {
            return Err(FormError::SpaceMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        let out_degree = self.degree.wedge(&other.degree);
        let mut out = Self::zero(out_degree);
        if out_degree.components() == 0 {
            return Ok(out);
        }
        let koszul_negates = (self.degree.internal * other.degree.total()) % 2 == 1;
        let fiber_count = out_degree.fiber_count();
        for (pa, fa, ca) in self.entries() {
            for (pb, fb, cb) in other.entries() {
                let sign = merge_sign(&pa, &pb) * merge_sign(&fa, &fb);
                if sign == 0 {
                    continue;
                }
                let base_rank = subset_rank(out_degree.base_dim, &merged(&pa, &pb));
                let fiber_rank = subset_rank(out_degree.fiber_dim, &merged(&fa, &fb));
                let flat = base_rank * fiber_count + fiber_rank;
                let mut term = ca.clone() * cb.clone();
                if (sign < 0) != koszul_negates {
                    term = -term;
                }
                out.coeffs[flat] = out.coeffs[flat].clone() + term;
            }
        }
        Ok(out)
    }

    /// `k`-fold wedge power (no factorial normalisation).
    pub fn wedge_power(&self, k: usize) -> FormResult<Self> {
        let mut acc = Self::one(self.degree.base_dim, self.degree.fiber_dim);
        for _ in 0..k {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// Action of a fiber-bivector-valued form (`self`, internal degree 2) on
    /// any form, as a derivation over fiber slots: the bivector `u_a ^ u_b`
    /// maps `u_b` to `eta_bb u_a` and `u_a` to `-eta_aa u_b`. Base indices
    /// shuffle-merge with `self` on the left. On two bivector-valued
    /// operands this is the so(fiber) bracket, antisymmetric up to the base
    /// form-degree sign.
    pub fn lie_action(&self, other: &Self) -> FormResult<Self> {
        if self.degree.internal != 2 {
            return Err(FormError::NotBivector { got: self.degree });
        }
        if !self.degree.same_spaces(&other.degree) {
            return Err(FormError::SpaceMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        let out_degree = FormDegree::new(
            self.degree.base_dim,
            self.degree.fiber_dim,
            self.degree.form + other.degree.form,
            other.degree.internal,
        );
        let mut out = Self::zero(out_degree);
        if out_degree.components() == 0 {
            return Ok(out);
        }
        let fiber_dim = self.degree.fiber_dim;
        for (pa, fa, ca) in self.entries() {
            let (low, high) = (fa[0], fa[1]);
            for (pb, fb, cb) in other.entries() {
                let base_sign = merge_sign(&pa, &pb);
                if base_sign == 0 {
                    continue;
                }
                let out_base = merged(&pa, &pb);
                for slot in 0..fb.len() {
                    let (replacement, eta) = if fb[slot] == high {
                        (low, i8::from(eta_sign(high, fiber_dim)))
                    } else if fb[slot] == low {
                        (high, -eta_sign(low, fiber_dim))
                    } else {
                        continue;
                    };
                    let mut new_fiber = fb.clone();
                    new_fiber[slot] = replacement;
                    let total_sign = S::from_int(i64::from(base_sign * eta));
                    out.accumulate_signed(
                        &out_base,
                        &new_fiber,
                        total_sign * ca.clone() * cb.clone(),
                    )?;
                }
            }
        }
        Ok(out)
    }

    /// Contraction of the last fiber slot with a coframe `e` (degree (1,1)):
    /// the degree `(+1, -1)` map `x -> [x, e]`. Each fiber slot `b` of `x`
    /// pairs with `e` through the fiber metric, the coframe leg merging in
    /// from the right of the base indices.
    pub fn rho_action(&self, coframe: &Self) -> FormResult<Self> {
        if coframe.degree.form != 1 || coframe.degree.internal != 1 {
            return Err(FormError::NotCoframe {
                got: coframe.degree,
            });
        }
        if !self.degree.same_spaces(&coframe.degree) {
            return Err(FormError::SpaceMismatch {
                left: self.degree,
                right: coframe.degree,
            });
        }
        if self.degree.internal == 0 {
            return Err(FormError::NoFiberSlot { got: self.degree });
        }
        let out_degree = FormDegree::new(
            self.degree.base_dim,
            self.degree.fiber_dim,
            self.degree.form + 1,
            self.degree.internal - 1,
        );
        let mut out = Self::zero(out_degree);
        if out_degree.components() == 0 {
            return Ok(out);
        }
        let last = self.degree.internal - 1;
        let fiber_dim = self.degree.fiber_dim;
        for (pa, fa, ca) in self.entries() {
            for (mu, fc, ce) in coframe.entries() {
                for slot in 0..fa.len() {
                    if fa[slot] != fc[0] {
                        continue;
                    }
                    let base_sign = merge_sign(&pa, &mu);
                    if base_sign == 0 {
                        continue;
                    }
                    // Moving the contracted slot to the last fiber position
                    // costs one transposition per slot it passes.
                    let hop_sign = if (last - slot) % 2 == 0 { 1 } else { -1 };
                    let eta = eta_sign(fa[slot], fiber_dim);
                    let mut new_fiber = fa.clone();
                    new_fiber.remove(slot);
                    let sign = S::from_int(i64::from(base_sign * hop_sign * eta));
                    out.accumulate_signed(
                        &merged(&pa, &mu),
                        &new_fiber,
                        sign * ca.clone() * ce.clone(),
                    )?;
                }
            }
        }
        Ok(out)
    }

    /// Interior product with a base vector on the first base slot. Satisfies
    /// the graded Leibniz rule with respect to total degree.
    pub fn contract(&self, vector: &[S]) -> FormResult<Self> {
        if vector.len() != self.degree.base_dim {
            return Err(FormError::VectorLength {
                expected: self.degree.base_dim,
                got: vector.len(),
            });
        }
        let out_degree = FormDegree::new(
            self.degree.base_dim,
            self.degree.fiber_dim,
            self.degree.form.saturating_sub(1),
            self.degree.internal,
        );
        let mut out = Self::zero(out_degree);
        if self.degree.form == 0 {
            return Ok(out);
        }
        for (pa, fa, ca) in self.entries() {
            for (slot, &p) in pa.iter().enumerate() {
                let component = vector[usize::from(p)].clone();
                if component.is_zero() {
                    continue;
                }
                let mut new_base = pa.clone();
                new_base.remove(slot);
                let sign = if slot % 2 == 0 { S::one() } else { -S::one() };
                out.accumulate_signed(&new_base, &fa, sign * component * ca.clone())?;
            }
        }
        Ok(out)
    }

    /// The single coefficient of a top-top form (base volume times fiber
    /// volume).
    pub fn top_coefficient(&self) -> FormResult<S> {
        if !self.degree.is_top() {
            return Err(FormError::NotTop { got: self.degree });
        }
        Ok(self.coeffs[0].clone())
    }

    /// Componentwise conversion to another scalar type through `f64`.
    pub fn map_to<T: Scalar>(&self) -> FormField<T> {
        FormField {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| T::from_f64_exact(c.to_f64()))
                .collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| {
                let x = c.to_f64();
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl<S: Scalar> FormField<S> {
    /// Rewrites all fiber indices through the linear substitution
    /// `u'_i = sum_a m[i][a] u_a`: the coefficient on a new fiber multi-index
    /// `I` is the sum over old multi-indices `J` of `det(m[I, J])` times the
    /// old coefficient, which is the induced action on the fiber exterior
    /// power. Base indices are untouched.
    pub fn fiber_change_of_basis(&self, m: &[Vec<S>]) -> FormResult<Self> {
        let degree = self.degree;
        debug_assert!(m.len() == degree.fiber_dim && m.iter().all(|r| r.len() == degree.fiber_dim));
        let j = degree.internal;
        let fiber_count = degree.fiber_count();
        // Minor determinants det(m[I, J]) for all strictly increasing index
        // sets I (rows) and J (columns) of size j.
        let mut minors = vec![vec![S::zero(); fiber_count]; fiber_count];
        for (i_rank, minor_row) in minors.iter_mut().enumerate() {
            let rows = subset_unrank(degree.fiber_dim, j, i_rank);
            for (j_rank, slot) in minor_row.iter_mut().enumerate() {
                let cols = subset_unrank(degree.fiber_dim, j, j_rank);
                let sub: Vec<Vec<S>> = rows
                    .iter()
                    .map(|&r| cols.iter().map(|&c| m[r as usize][c as usize].clone()).collect())
                    .collect();
                *slot = crate::linalg::dense_determinant(&sub);
            }
        }
        let base_count = degree.base_count();
        let mut out = Self::zero(degree);
        for base_rank in 0..base_count {
            for new_fiber in 0..fiber_count {
                let mut acc = S::zero();
                for old_fiber in 0..fiber_count {
                    let coeff = &self.coeffs[base_rank * fiber_count + old_fiber];
                    if coeff.is_zero() || minors[new_fiber][old_fiber].is_zero() {
                        continue;
                    }
                    acc = acc + minors[new_fiber][old_fiber].clone() * coeff.clone();
                }
                out.coeffs[base_rank * fiber_count + new_fiber] = acc;
            }
        }
        Ok(out)
    }

    /// Convenience constructor for a coframe-type field (degree (1,1)) from a
    /// `base_dim x fiber_dim` row-major table `entries[mu][a]`.
    pub fn coframe_from_rows(
        base_dim: usize,
        fiber_dim: usize,
        entries: &[Vec<S>],
    ) -> FormResult<Self> {
        let degree = FormDegree::new(base_dim, fiber_dim, 1, 1);
        let mut field = Self::zero(degree);
        for (mu, row) in entries.iter().enumerate() {
            for (a, value) in row.iter().enumerate() {
                field.set(
                    &[u8::try_from(mu).expect("base index fits u8")],
                    &[u8::try_from(a).expect("fiber index fits u8")],
                    value.clone(),
                )?;
            }
        }
        Ok(field)
    }
}
