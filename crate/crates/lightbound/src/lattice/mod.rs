//! Discretised closed boundary: periodic grids, summation-by-parts
//! derivatives, and grid-valued form fields.
//!
//! The boundary is an (N-1)-torus sampled on a rectangular lattice. The
//! forward/backward difference pair satisfies the discrete
//! summation-by-parts identity
//!
//! ```text
//! sum_sites (D+ f) g = - sum_sites f (D- g)
//! ```
//!
//! exactly (it is a rearrangement of finitely many products). Densities and
//! vector fields use the centered average `D0 = (D+ + D-)/2`, which is
//! skew-adjoint on the torus by the same identity and second-order accurate,
//! so bracket identities that discard total derivatives hold up to `O(h^2)`.
//!
//! A [`GridField`] stores one fiber-valued form per site; the calculus
//! (exterior derivative, covariant derivative, curvature, contraction with
//! grid vector fields, integration of top-degree densities) lives here,
//! while constraint functionals build on it in [`crate::lattice::constraints`].

use thiserror::Error;

use crate::coframe::CoframeError;
use crate::fixer::FixerError;
use crate::forms::{FormDegree, FormError, FormField};
use crate::linalg::LinalgError;
use crate::scalar::Scalar;

pub mod bracket;
pub mod config;
pub mod constraints;

#[cfg(test)]
mod tests;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("grid shape must be nonempty with nonzero extents, got {0:?}")]
    BadShape(Vec<usize>),
    #[error("spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("expected {expected} sites, got {got}")]
    SiteCountMismatch { expected: usize, got: usize },
    #[error("grids differ: {0:?} vs {1:?}")]
    GridMismatch(Vec<usize>, Vec<usize>),
    #[error("expected degree {expected}, got {got}")]
    DegreeMismatch { expected: FormDegree, got: FormDegree },
    #[error("vector field needs {expected} components per site, got {got}")]
    VectorLength { expected: usize, got: usize },
    #[error("integrand must be a top-degree density, got {0}")]
    NotADensity(FormDegree),
    #[error("configuration is not torsion-free at site {site}: |e^(N-3) d_omega e| = {residual:.3e}")]
    OffShell { site: usize, residual: f64 },
    #[error("multiplier {index} of kind {kind} fails its membership residual {residual:.3e}")]
    MultiplierOffSubspace {
        kind: &'static str,
        index: usize,
        residual: f64,
    },
    #[error("restricted inverse failed at site {site}: {message}")]
    RestrictedInverse { site: usize, message: String },
    #[error("multiplier/torsion wedge pairing is singular; the two spaces are not dual")]
    SingularPairing,
    #[error("configuration deviates from the frozen site geometry at site {site} by {residual:.3e}")]
    GeometryMismatch { site: usize, residual: f64 },
    #[error("tau basis degenerate; enlarge/vary the null-direction profile")]
    DegenerateTorsionBlock,
    #[error("field configuration parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Coframe(#[from] CoframeError),
    #[error(transparent)]
    Fixer(#[from] FixerError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type LatticeResult<T> = Result<T, LatticeError>;

/// Periodic rectangular sampling of a closed (N-1)-dimensional boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBoundary {
    shape: Vec<usize>,
    spacing: Vec<f64>,
}

impl DiscreteBoundary {
    /// A torus with the given per-axis site counts and spacings.
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>) -> LatticeResult<Self> {
        if shape.is_empty() || shape.iter().any(|&s| s == 0) {
            return Err(LatticeError::BadShape(shape));
        }
        if spacing.len() != shape.len() {
            return Err(LatticeError::VectorLength {
                expected: shape.len(),
                got: spacing.len(),
            });
        }
        if let Some(&h) = spacing.iter().find(|h| !h.is_finite() || **h <= 0.0) {
            return Err(LatticeError::BadSpacing(h));
        }
        Ok(Self { shape, spacing })
    }

    /// Unit torus: spacing `1/sites` per axis, so coordinates live in `[0,1)`.
    pub fn unit_torus(shape: Vec<usize>) -> LatticeResult<Self> {
        let spacing = shape.iter().map(|&s| 1.0 / s as f64).collect();
        Self::new(shape, spacing)
    }

    pub fn dimension(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn site_count(&self) -> usize {
        self.shape.iter().product()
    }

    /// Volume of one grid cell, the quadrature weight of every site.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Multi-index of a flat site index; axis 0 varies fastest.
    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rest = site;
        self.shape
            .iter()
            .map(|&extent| {
                let c = rest % extent;
                rest /= extent;
                c
            })
            .collect()
    }

    /// Flat site index of a multi-index (entries may exceed the extent and
    /// wrap around).
    pub fn site(&self, coords: &[usize]) -> usize {
        let mut flat = 0;
        for (axis, &c) in coords.iter().enumerate().rev() {
            flat = flat * self.shape[axis] + (c % self.shape[axis]);
        }
        flat
    }

    /// Site shifted by `offset` cells along `axis`, wrapping periodically.
    pub fn neighbor(&self, site: usize, axis: usize, offset: isize) -> usize {
        let mut coords = self.coords(site);
        let extent = self.shape[axis] as isize;
        let shifted = (coords[axis] as isize + offset).rem_euclid(extent);
        coords[axis] = shifted as usize;
        self.site(&coords)
    }

    /// Coordinate of `site` along `axis`, in grid units of the spacing.
    pub fn coordinate(&self, site: usize, axis: usize) -> f64 {
        self.coords(site)[axis] as f64 * self.spacing[axis]
    }
}

/// Which single-axis difference stencil to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// `(f(x+h) - f(x)) / h`.
    Forward,
    /// `(f(x) - f(x-h)) / h`.
    Backward,
    /// `(f(x+h) - f(x-h)) / (2h)`, the skew-adjoint average of the pair.
    Centered,
}

/// A fiber-valued form sampled over the grid: one [`FormField`] per site,
/// all of the same degree.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<S: Scalar> {
    degree: FormDegree,
    values: Vec<FormField<S>>,
}

impl<S: Scalar> GridField<S> {
    pub fn zero(boundary: &DiscreteBoundary, degree: FormDegree) -> Self {
        Self {
            degree,
            values: vec![FormField::zero(degree); boundary.site_count()],
        }
    }

    /// The same form at every site.
    pub fn constant(boundary: &DiscreteBoundary, form: FormField<S>) -> Self {
        Self {
            degree: form.degree(),
            values: vec![form; boundary.site_count()],
        }
    }

    pub fn from_fn(
        boundary: &DiscreteBoundary,
        degree: FormDegree,
        mut f: impl FnMut(usize) -> FormField<S>,
    ) -> LatticeResult<Self> {
        let values: Vec<FormField<S>> = (0..boundary.site_count()).map(&mut f).collect();
        for v in &values {
            if v.degree() != degree {
                return Err(LatticeError::DegreeMismatch {
                    expected: degree,
                    got: v.degree(),
                });
            }
        }
        Ok(Self { degree, values })
    }

    pub fn from_values(degree: FormDegree, values: Vec<FormField<S>>) -> LatticeResult<Self> {
        for v in &values {
            if v.degree() != degree {
                return Err(LatticeError::DegreeMismatch {
                    expected: degree,
                    got: v.degree(),
                });
            }
        }
        Ok(Self { degree, values })
    }

    pub fn degree(&self) -> FormDegree {
        self.degree
    }

    pub fn site_count(&self) -> usize {
        self.values.len()
    }

    pub fn site(&self, s: usize) -> &FormField<S> {
        &self.values[s]
    }

    pub fn site_mut(&mut self, s: usize) -> &mut FormField<S> {
        &mut self.values[s]
    }

    pub fn sites(&self) -> &[FormField<S>] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(FormField::is_zero)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(FormField::sup_norm)
            .fold(0.0, f64::max)
    }

    fn check_same(&self, other: &Self) -> LatticeResult<()> {
        if self.values.len() != other.values.len() {
            return Err(LatticeError::SiteCountMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> LatticeResult<Self> {
        self.check_same(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            degree: self.degree,
            values,
        })
    }

    pub fn sub(&self, other: &Self) -> LatticeResult<Self> {
        self.check_same(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            degree: self.degree,
            values,
        })
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self {
            degree: self.degree,
            values: self.values.iter().map(|v| v.scale(factor)).collect(),
        }
    }

    /// Multiplies each site by a per-site scalar.
    pub fn scale_by(&self, weights: &[S]) -> LatticeResult<Self> {
        if weights.len() != self.values.len() {
            return Err(LatticeError::SiteCountMismatch {
                expected: self.values.len(),
                got: weights.len(),
            });
        }
        Ok(Self {
            degree: self.degree,
            values: self
                .values
                .iter()
                .zip(weights)
                .map(|(v, w)| v.scale(w))
                .collect(),
        })
    }

    /// Pointwise wedge product.
    pub fn wedge(&self, other: &Self) -> LatticeResult<Self> {
        self.check_same(other)?;
        let values: Vec<FormField<S>> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.wedge(b))
            .collect::<Result<_, _>>()?;
        let degree = self.degree.wedge(&other.degree);
        Ok(Self { degree, values })
    }

    /// Pointwise wedge with one fixed form.
    pub fn wedge_form(&self, form: &FormField<S>) -> LatticeResult<Self> {
        let values: Vec<FormField<S>> = self
            .values
            .iter()
            .map(|a| a.wedge(form))
            .collect::<Result<_, _>>()?;
        let degree = self.degree.wedge(&form.degree());
        Ok(Self { degree, values })
    }

    /// Pointwise internal Lie-algebra action.
    pub fn lie(&self, other: &Self) -> LatticeResult<Self> {
        self.check_same(other)?;
        let values: Vec<FormField<S>> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.lie_action(b))
            .collect::<Result<_, _>>()?;
        let degree = values
            .first()
            .map(FormField::degree)
            .unwrap_or(self.degree);
        Ok(Self { degree, values })
    }

    /// Per-axis difference of every coefficient.
    pub fn difference(
        &self,
        boundary: &DiscreteBoundary,
        axis: usize,
        stencil: Stencil,
    ) -> Self {
        let h = S::from_f64_exact(boundary.spacing[axis]);
        let two = S::from_int(2);
        let mut values = Vec::with_capacity(self.values.len());
        for s in 0..self.values.len() {
            let fwd = boundary.neighbor(s, axis, 1);
            let bwd = boundary.neighbor(s, axis, -1);
            let diff = match stencil {
                Stencil::Forward => self.values[fwd].sub(&self.values[s]),
                Stencil::Backward => self.values[s].sub(&self.values[bwd]),
                Stencil::Centered => self.values[fwd].sub(&self.values[bwd]),
            }
            .expect("same degree");
            let mut scaled = diff;
            for c in scaled.coeffs_mut() {
                *c = c.clone() / h.clone();
                if stencil == Stencil::Centered {
                    *c = c.clone() / two.clone();
                }
            }
            values.push(scaled);
        }
        Self {
            degree: self.degree,
            values,
        }
    }

    /// Discrete exterior derivative with the centered stencil:
    /// `d(f dx^I) = sum_a (D0_a f) dx^a dx^I`.
    pub fn exterior_derivative(&self, boundary: &DiscreteBoundary) -> LatticeResult<Self> {
        let out_degree = FormDegree::new(
            self.degree.base_dim,
            self.degree.fiber_dim,
            self.degree.form + 1,
            self.degree.internal,
        );
        let mut out = Self::zero_of(boundary, out_degree);
        for axis in 0..boundary.dimension() {
            let derived = self.difference(boundary, axis, Stencil::Centered);
            let axis_u8 = axis as u8;
            for s in 0..out.values.len() {
                let site = &derived.values[s];
                let target = &mut out.values[s];
                for (base, fiber, value) in site.entries() {
                    if value.magnitude() == 0.0 && S::EXACT {
                        continue;
                    }
                    let mut extended = Vec::with_capacity(base.len() + 1);
                    extended.push(axis_u8);
                    extended.extend_from_slice(&base);
                    target.accumulate_signed(&extended, &fiber, value.clone())?;
                }
            }
        }
        Ok(out)
    }

    fn zero_of(boundary: &DiscreteBoundary, degree: FormDegree) -> Self {
        Self {
            degree,
            values: vec![FormField::zero(degree); boundary.site_count()],
        }
    }

    /// Covariant derivative `d x + [omega, x]` for a grid connection.
    pub fn covariant_derivative(
        &self,
        boundary: &DiscreteBoundary,
        omega: &GridField<S>,
    ) -> LatticeResult<Self> {
        let d = self.exterior_derivative(boundary)?;
        let bracket = omega.lie(self)?;
        d.add(&bracket)
    }

    /// Pointwise contraction with a grid vector field (base-index slot).
    pub fn contract(&self, vector: &GridVector<S>) -> LatticeResult<Self> {
        if vector.components.len() != self.values.len() {
            return Err(LatticeError::SiteCountMismatch {
                expected: self.values.len(),
                got: vector.components.len(),
            });
        }
        let values: Vec<FormField<S>> = self
            .values
            .iter()
            .zip(&vector.components)
            .map(|(form, comp)| form.contract(comp))
            .collect::<Result<_, _>>()?;
        let degree = values
            .first()
            .map(FormField::degree)
            .unwrap_or(self.degree);
        Ok(Self { degree, values })
    }

    /// Sum of top coefficients times the cell volume. Errors unless the
    /// degree is top in both the form and fiber slots.
    pub fn integrate(&self, boundary: &DiscreteBoundary) -> LatticeResult<S> {
        if !self.degree.is_top() {
            return Err(LatticeError::NotADensity(self.degree));
        }
        let mut acc = S::from_int(0);
        for v in &self.values {
            acc = acc + v.top_coefficient()?;
        }
        Ok(acc * S::from_f64_exact(boundary.cell_volume()))
    }

    pub fn map_to<T: Scalar>(&self) -> GridField<T> {
        GridField {
            degree: self.degree,
            values: self.values.iter().map(FormField::map_to).collect(),
        }
    }
}

/// A tangent vector field on the grid: per-site coordinate components.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVector<S: Scalar> {
    components: Vec<Vec<S>>,
}

impl<S: Scalar> GridVector<S> {
    pub fn new(boundary: &DiscreteBoundary, components: Vec<Vec<S>>) -> LatticeResult<Self> {
        if components.len() != boundary.site_count() {
            return Err(LatticeError::SiteCountMismatch {
                expected: boundary.site_count(),
                got: components.len(),
            });
        }
        for c in &components {
            if c.len() != boundary.dimension() {
                return Err(LatticeError::VectorLength {
                    expected: boundary.dimension(),
                    got: c.len(),
                });
            }
        }
        Ok(Self { components })
    }

    /// The same components at every site.
    pub fn constant(boundary: &DiscreteBoundary, components: Vec<S>) -> LatticeResult<Self> {
        Self::new(boundary, vec![components; boundary.site_count()])
    }

    pub fn from_fn(
        boundary: &DiscreteBoundary,
        mut f: impl FnMut(usize) -> Vec<S>,
    ) -> LatticeResult<Self> {
        Self::new(boundary, (0..boundary.site_count()).map(&mut f).collect())
    }

    pub fn site(&self, s: usize) -> &[S] {
        &self.components[s]
    }

    pub fn site_count(&self) -> usize {
        self.components.len()
    }

    /// Discrete Lie bracket of vector fields,
    /// `[x, y]^a = x^b D0_b y^a - y^b D0_b x^a`.
    pub fn lie_bracket(&self, other: &Self, boundary: &DiscreteBoundary) -> LatticeResult<Self> {
        let dim = boundary.dimension();
        let sites = boundary.site_count();
        let mut components = vec![vec![S::from_int(0); dim]; sites];
        for axis in 0..dim {
            let h2 = S::from_f64_exact(2.0 * boundary.spacing[axis]);
            for s in 0..sites {
                let fwd = boundary.neighbor(s, axis, 1);
                let bwd = boundary.neighbor(s, axis, -1);
                for a in 0..dim {
                    let dy = (other.components[fwd][a].clone()
                        - other.components[bwd][a].clone())
                        / h2.clone();
                    let dx = (self.components[fwd][a].clone()
                        - self.components[bwd][a].clone())
                        / h2.clone();
                    let term = self.components[s][axis].clone() * dy
                        - other.components[s][axis].clone() * dx;
                    components[s][a] = components[s][a].clone() + term;
                }
            }
        }
        Ok(Self { components })
    }
}

/// Per-site scalar multiplier (`lambda`, profile functions, components).
#[derive(Debug, Clone, PartialEq)]
pub struct GridScalar<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> GridScalar<S> {
    pub fn new(boundary: &DiscreteBoundary, values: Vec<S>) -> LatticeResult<Self> {
        if values.len() != boundary.site_count() {
            return Err(LatticeError::SiteCountMismatch {
                expected: boundary.site_count(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn constant(boundary: &DiscreteBoundary, value: S) -> Self {
        Self {
            values: vec![value; boundary.site_count()],
        }
    }

    pub fn from_fn(boundary: &DiscreteBoundary, mut f: impl FnMut(usize) -> S) -> Self {
        Self {
            values: (0..boundary.site_count()).map(&mut f).collect(),
        }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn site(&self, s: usize) -> &S {
        &self.values[s]
    }
}

/// Summation-by-parts defect of the forward/backward pair along one axis,
/// computed in the scalar's own arithmetic:
/// `sum (D+ f) g + sum f (D- g)`. Exactly zero over rationals.
pub fn sbp_defect<S: Scalar>(
    boundary: &DiscreteBoundary,
    f: &GridScalar<S>,
    g: &GridScalar<S>,
    axis: usize,
) -> S {
    let h = S::from_f64_exact(boundary.spacing[axis]);
    let mut acc = S::from_int(0);
    for s in 0..boundary.site_count() {
        let fwd = boundary.neighbor(s, axis, 1);
        let bwd = boundary.neighbor(s, axis, -1);
        let dplus_f = (f.values[fwd].clone() - f.values[s].clone()) / h.clone();
        let dminus_g = (g.values[s].clone() - g.values[bwd].clone()) / h.clone();
        acc = acc + dplus_f * g.values[s].clone() + f.values[s].clone() * dminus_g;
    }
    acc
}
