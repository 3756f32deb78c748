//! Full field configurations on the lattice and the frozen site-local
//! geometry they share.
//!
//! A lattice computation fixes one boundary coframe for the whole grid and
//! derives every site-independent object from it once: the kernel and
//! torsion subspaces, the two projections entering the degenerate
//! constraint identities, the restricted wedge inverse, and the
//! decomposition solver. [`SiteGeometry`] bundles these. The per-site data
//! — the coframe, transversal direction, connection, and reference
//! connection — live in a [`FieldConfiguration`] together with the
//! cosmological constant.
//!
//! The module also defines the plain-text container for configurations, a
//! self-describing format shared with the linearized payloads.

use num::rational::BigRational;

use crate::coframe::fixture::{parse_value, value_string};
use crate::coframe::spaces::BoundarySpaces;
use crate::coframe::tau::WedgeBracketInverter;
use crate::coframe::{subspace_fields, BoundaryCoframe, SignatureClass};
use crate::fixer::RepresentativeFixer;
use crate::forms::{FormDegree, FormField};
use crate::linalg::{dense_inverse, dense_transpose, RankPolicy, Subspace};
use crate::scalar::Scalar;

use super::{DiscreteBoundary, GridField, LatticeError, LatticeResult};

/// Euclidean projection of a form field onto a subspace of its component
/// space, dispatched on the scalar mode.
pub(crate) fn euclid_project<S: Scalar>(
    sub: &Subspace,
    x: &FormField<S>,
) -> LatticeResult<FormField<S>> {
    let projected: Vec<S> = if S::EXACT {
        let v: Vec<BigRational> = x
            .coeffs()
            .iter()
            .map(|c| c.to_exact().expect("exact scalar"))
            .collect();
        sub.project_exact(&v)?
            .into_iter()
            .map(S::from_exact)
            .collect()
    } else {
        let v: Vec<f64> = x.coeffs().iter().map(Scalar::to_f64).collect();
        sub.project_float(&v)?
            .into_iter()
            .map(S::from_f64_exact)
            .collect()
    };
    Ok(FormField::from_coeffs(x.degree(), projected)?)
}

/// Relative size of the top coefficient of `a ^ b`; the building block of
/// the annihilator diagnostics.
fn relative_top<S: Scalar>(a: &FormField<S>, b: &FormField<S>) -> LatticeResult<f64> {
    let top = a.wedge(b)?.top_coefficient()?;
    let scale = (a.sup_norm() * b.sup_norm()).max(1.0);
    Ok(top.magnitude() / scale)
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Site-independent geometric data derived from one constant boundary
/// coframe.
///
/// Built once per lattice run and shared by every site. For lightlike
/// coframes it also carries the degenerate-sector machinery: the
/// multiplier and torsion bases, the adjoint pair of projections onto
/// them, the restricted wedge inverse, and the decomposition solver. The
/// two projections satisfy
///
/// ```text
/// top(project_multiplier(x) ^ a) = top(x ^ project_torsion(a))
/// ```
///
/// for all `x` and `a` of the paired degrees; this rests on the multiplier
/// space wedge-annihilating the Euclidean complement of the torsion space,
/// which is measured at build time and exposed as
/// [`annihilator_residuals`](Self::annihilator_residuals).
pub struct SiteGeometry<S: Scalar> {
    coframe: BoundaryCoframe<S>,
    spaces: BoundarySpaces,
    inverter: Option<WedgeBracketInverter<S>>,
    fixer: Option<RepresentativeFixer<S>>,
    s_basis: Vec<FormField<S>>,
    t_basis: Vec<FormField<S>>,
    /// Inverse transposed pairing matrix `(M^T)^{-1}`, `M_ij = top(s_i ^ t_j)`.
    pairing_inverse: Vec<Vec<S>>,
    annihilator_residuals: (f64, f64),
    flat_connections: Vec<FormField<S>>,
    powers: Vec<FormField<S>>,
}

impl<S: Scalar> SiteGeometry<S> {
    /// Derives all site-independent data from `coframe`. The policy only
    /// matters in float mode.
    pub fn build(coframe: BoundaryCoframe<S>, policy: &RankPolicy) -> LatticeResult<Self> {
        let n = coframe.bulk_dimension();
        let spaces = BoundarySpaces::build(&coframe, policy)?;
        let degenerate = matches!(coframe.signature_class(), SignatureClass::Lightlike);

        let s_degree = FormDegree::new(n - 1, n, n - 3, n - 1);
        let t_degree = FormDegree::new(n - 1, n, 2, 1);
        let s_basis = subspace_fields::<S>(&spaces.multiplier_space, s_degree)?;
        let t_basis = subspace_fields::<S>(&spaces.torsion_space, t_degree)?;
        if s_basis.len() != t_basis.len() {
            return Err(LatticeError::SingularPairing);
        }

        let q = s_basis.len();
        let pairing_inverse = if q == 0 {
            Vec::new()
        } else {
            let m: Vec<Vec<S>> = s_basis
                .iter()
                .map(|s| {
                    t_basis
                        .iter()
                        .map(|t| Ok(s.wedge(t)?.top_coefficient()?))
                        .collect::<LatticeResult<Vec<S>>>()
                })
                .collect::<LatticeResult<_>>()?;
            dense_inverse(&dense_transpose(&m)).ok_or(LatticeError::SingularPairing)?
        };

        // The adjointness of the two projections needs the multiplier basis
        // to wedge-annihilate the complement of the torsion space; record
        // how well both directions of that duality hold.
        let t_perp = subspace_fields::<S>(&spaces.torsion_space.orthocomplement(policy)?, t_degree)?;
        let s_perp =
            subspace_fields::<S>(&spaces.multiplier_space.orthocomplement(policy)?, s_degree)?;
        let mut forward = 0.0f64;
        for s in &s_basis {
            for u in &t_perp {
                forward = forward.max(relative_top(s, u)?);
            }
        }
        let mut backward = 0.0f64;
        for v in &s_perp {
            for t in &t_basis {
                backward = backward.max(relative_top(v, t)?);
            }
        }

        let flat_connections = subspace_fields::<S>(
            &coframe.bracket_operator(1, 2)?.kernel(policy)?,
            FormDegree::new(n - 1, n, 1, 2),
        )?;

        let powers = (0..n)
            .map(|k| coframe.coframe().wedge_power(k))
            .collect::<Result<_, _>>()?;

        let (inverter, fixer) = if degenerate {
            (
                Some(WedgeBracketInverter::new(&coframe)?),
                Some(RepresentativeFixer::new(&coframe, policy)?),
            )
        } else {
            (None, None)
        };

        Ok(Self {
            coframe,
            spaces,
            inverter,
            fixer,
            s_basis,
            t_basis,
            pairing_inverse,
            annihilator_residuals: (forward, backward),
            flat_connections,
            powers,
        })
    }

    pub fn coframe(&self) -> &BoundaryCoframe<S> {
        &self.coframe
    }

    pub fn spaces(&self) -> &BoundarySpaces {
        &self.spaces
    }

    /// True when the boundary metric is lightlike and the degenerate
    /// sector (multiplier space, torsion space, fixer) is present.
    pub fn degenerate(&self) -> bool {
        self.inverter.is_some()
    }

    /// Restricted inverse of the wedge map, lightlike coframes only.
    pub fn inverter(&self) -> Option<&WedgeBracketInverter<S>> {
        self.inverter.as_ref()
    }

    /// Decomposition solver for `(N-3, N-1)`-forms, lightlike only.
    pub fn fixer(&self) -> Option<&RepresentativeFixer<S>> {
        self.fixer.as_ref()
    }

    /// Basis of the constraint multiplier space inside `(N-3, N-1)`-forms.
    pub fn multiplier_basis(&self) -> &[FormField<S>] {
        &self.s_basis
    }

    /// Basis of the residual torsion space inside `(2, 1)`-forms.
    pub fn torsion_basis(&self) -> &[FormField<S>] {
        &self.t_basis
    }

    /// Basis of `Ker (x -> [x, e])` on `(1, 2)`-forms: connection values
    /// that keep a constant coframe torsion-free while still curving.
    pub fn flat_connection_basis(&self) -> &[FormField<S>] {
        &self.flat_connections
    }

    /// `k`-th wedge power of the coframe, `0 <= k <= N-1`.
    pub fn coframe_power(&self, k: usize) -> &FormField<S> {
        &self.powers[k]
    }

    /// How far the multiplier/torsion duality is from exact: the largest
    /// relative top coefficient of (multiplier basis ^ torsion complement)
    /// and of (multiplier complement ^ torsion basis).
    pub fn annihilator_residuals(&self) -> (f64, f64) {
        self.annihilator_residuals
    }

    /// Euclidean projection of a `(2,1)`-form onto the torsion space.
    pub fn project_torsion(&self, alpha: &FormField<S>) -> LatticeResult<FormField<S>> {
        euclid_project(&self.spaces.torsion_space, alpha)
    }

    /// Projection of an `(N-3, N-1)`-form onto the multiplier space,
    /// adjoint to [`project_torsion`](Self::project_torsion) under the
    /// top-degree wedge pairing and the identity on the multiplier space.
    pub fn project_multiplier(&self, x: &FormField<S>) -> LatticeResult<FormField<S>> {
        let degree = FormDegree::new(
            self.coframe.boundary_dimension(),
            self.coframe.bulk_dimension(),
            self.coframe.bulk_dimension() - 3,
            self.coframe.bulk_dimension() - 1,
        );
        if x.degree() != degree {
            return Err(LatticeError::DegreeMismatch {
                expected: degree,
                got: x.degree(),
            });
        }
        if self.s_basis.is_empty() {
            return Ok(FormField::zero(degree));
        }
        let b: Vec<S> = self
            .t_basis
            .iter()
            .map(|t| Ok(x.wedge(t)?.top_coefficient()?))
            .collect::<LatticeResult<_>>()?;
        let mut out = FormField::zero(degree);
        for (row, s) in self.pairing_inverse.iter().zip(&self.s_basis) {
            let mut c = S::zero();
            for (m, bj) in row.iter().zip(&b) {
                c = c + m.clone() * bj.clone();
            }
            out = out.add(&s.scale(&c))?;
        }
        Ok(out)
    }

    /// Relative Euclidean distance of `x` from the multiplier space; the
    /// membership residual for externally supplied multipliers.
    pub fn multiplier_membership_residual(&self, x: &FormField<S>) -> LatticeResult<f64> {
        let projected = euclid_project(&self.spaces.multiplier_space, x)?;
        let defect = x.sub(&projected)?;
        Ok(defect.sup_norm() / x.sup_norm().max(1.0))
    }
}

/// A full set of lattice fields: coframe, transversal direction,
/// connection, reference connection, and the cosmological constant.
#[derive(Debug, Clone)]
pub struct FieldConfiguration<S: Scalar> {
    boundary: DiscreteBoundary,
    e: GridField<S>,
    e_n: GridField<S>,
    omega: GridField<S>,
    omega_0: GridField<S>,
    cosmological: f64,
}

impl<S: Scalar> FieldConfiguration<S> {
    pub fn new(
        boundary: DiscreteBoundary,
        e: GridField<S>,
        e_n: GridField<S>,
        omega: GridField<S>,
        omega_0: GridField<S>,
        cosmological: f64,
    ) -> LatticeResult<Self> {
        let n = e.degree().fiber_dim;
        let base = boundary.dimension();
        if n != base + 1 {
            return Err(LatticeError::DegreeMismatch {
                expected: FormDegree::new(base, base + 1, 1, 1),
                got: e.degree(),
            });
        }
        let expect = [
            (&e, FormDegree::new(base, n, 1, 1)),
            (&e_n, FormDegree::new(base, n, 0, 1)),
            (&omega, FormDegree::new(base, n, 1, 2)),
            (&omega_0, FormDegree::new(base, n, 1, 2)),
        ];
        for (field, degree) in expect {
            if field.degree() != degree {
                return Err(LatticeError::DegreeMismatch {
                    expected: degree,
                    got: field.degree(),
                });
            }
            if field.site_count() != boundary.site_count() {
                return Err(LatticeError::SiteCountMismatch {
                    expected: boundary.site_count(),
                    got: field.site_count(),
                });
            }
        }
        Ok(Self {
            boundary,
            e,
            e_n,
            omega,
            omega_0,
            cosmological,
        })
    }

    /// A configuration whose coframe and transversal are the same at every
    /// site, taken from `coframe`.
    pub fn from_constant_coframe(
        boundary: DiscreteBoundary,
        coframe: &BoundaryCoframe<S>,
        omega: GridField<S>,
        omega_0: GridField<S>,
        cosmological: f64,
    ) -> LatticeResult<Self> {
        let e = GridField::constant(&boundary, coframe.coframe().clone());
        let e_n = GridField::constant(&boundary, coframe.transversal().clone());
        Self::new(boundary, e, e_n, omega, omega_0, cosmological)
    }

    pub fn boundary(&self) -> &DiscreteBoundary {
        &self.boundary
    }

    pub fn bulk_dimension(&self) -> usize {
        self.e.degree().fiber_dim
    }

    pub fn coframe_field(&self) -> &GridField<S> {
        &self.e
    }

    pub fn transversal_field(&self) -> &GridField<S> {
        &self.e_n
    }

    pub fn connection(&self) -> &GridField<S> {
        &self.omega
    }

    pub fn reference_connection(&self) -> &GridField<S> {
        &self.omega_0
    }

    pub fn cosmological(&self) -> f64 {
        self.cosmological
    }

    /// Replaces the connection, keeping everything else.
    pub fn with_connection(&self, omega: GridField<S>) -> LatticeResult<Self> {
        Self::new(
            self.boundary.clone(),
            self.e.clone(),
            self.e_n.clone(),
            omega,
            self.omega_0.clone(),
            self.cosmological,
        )
    }

    /// `omega - omega_0`, the dynamical part of the connection.
    pub fn connection_shift(&self) -> LatticeResult<GridField<S>> {
        self.omega.sub(&self.omega_0)
    }

    /// Covariant derivative of the coframe, `d e + [omega, e]`.
    pub fn torsion(&self) -> LatticeResult<GridField<S>> {
        self.e.covariant_derivative(&self.boundary, &self.omega)
    }

    /// Curvature of the connection, `d omega + 1/2 [omega, omega]`.
    pub fn curvature(&self) -> LatticeResult<GridField<S>> {
        curvature_of(&self.boundary, &self.omega)
    }

    /// Curvature of the reference connection.
    pub fn reference_curvature(&self) -> LatticeResult<GridField<S>> {
        curvature_of(&self.boundary, &self.omega_0)
    }

    /// Per-site `k`-th wedge power of the coframe.
    pub fn coframe_power(&self, k: usize) -> LatticeResult<GridField<S>> {
        let degree = FormDegree::new(
            self.e.degree().base_dim,
            self.e.degree().fiber_dim,
            k,
            k,
        );
        GridField::from_fn(&self.boundary, degree, |s| {
            self.e.site(s).wedge_power(k).expect("power of a (1,1)-form")
        })
    }

    /// `e^{N-3} ^ d_omega e`, the constrained part of the torsion.
    pub fn weighted_torsion(&self) -> LatticeResult<GridField<S>> {
        let n = self.bulk_dimension();
        self.coframe_power(n - 3)?.wedge(&self.torsion()?)
    }

    pub fn map_to<T: Scalar>(&self) -> FieldConfiguration<T> {
        FieldConfiguration {
            boundary: self.boundary.clone(),
            e: self.e.map_to(),
            e_n: self.e_n.map_to(),
            omega: self.omega.map_to(),
            omega_0: self.omega_0.map_to(),
            cosmological: self.cosmological,
        }
    }

    /// Sup norms of the three on-shell indicators.
    pub fn on_shell_report(&self, geometry: &SiteGeometry<S>) -> LatticeResult<OnShellReport> {
        let torsion = self.torsion()?;
        let weighted = self.coframe_power(self.bulk_dimension() - 3)?.wedge(&torsion)?;
        let mut transverse = 0.0f64;
        if geometry.degenerate() {
            for s in 0..torsion.site_count() {
                transverse = transverse.max(geometry.project_torsion(torsion.site(s))?.sup_norm());
            }
        }
        let density = unit_hamiltonian_density(self, geometry)?;
        Ok(OnShellReport {
            torsion_residual: weighted.sup_norm(),
            transverse_residual: transverse,
            hamiltonian_residual: density.sup_norm(),
        })
    }

    /// Writes the configuration in the plain-text container format.
    pub fn to_text(&self) -> String {
        write_table(
            self.bulk_dimension(),
            &self.boundary,
            self.cosmological,
            PAYLOAD_CONFIGURATION,
            &[
                ("e", &self.e),
                ("e_n", &self.e_n),
                ("omega", &self.omega),
                ("omega_0", &self.omega_0),
            ],
        )
    }

    /// Parses a configuration from the plain-text container format.
    pub fn from_text(text: &str) -> LatticeResult<Self> {
        let table = FieldTable::parse(text)?;
        if table.payload != PAYLOAD_CONFIGURATION {
            return Err(LatticeError::Parse {
                line: 0,
                message: format!(
                    "payload `{}` is not a full field configuration",
                    table.payload
                ),
            });
        }
        let boundary = table.boundary()?;
        let n = table.dim;
        let base = n - 1;
        let e = table.grid_field::<S>("e", FormDegree::new(base, n, 1, 1), &boundary)?;
        let e_n = table.grid_field::<S>("e_n", FormDegree::new(base, n, 0, 1), &boundary)?;
        let omega = table.grid_field::<S>("omega", FormDegree::new(base, n, 1, 2), &boundary)?;
        let omega_0 = table.grid_field::<S>("omega_0", FormDegree::new(base, n, 1, 2), &boundary)?;
        Self::new(boundary, e, e_n, omega, omega_0, table.lambda)
    }
}

/// Curvature of an arbitrary grid connection.
pub fn curvature_of<S: Scalar>(
    boundary: &DiscreteBoundary,
    omega: &GridField<S>,
) -> LatticeResult<GridField<S>> {
    let d = omega.exterior_derivative(boundary)?;
    let quad = omega.lie(omega)?.scale(&S::ratio(1, 2));
    d.add(&quad)
}

/// Sup norms of the three residuals that cut out the on-shell locus: the
/// wedge-constrained torsion, its transverse part, and the unit-multiplier
/// Hamiltonian density.
#[derive(Debug, Clone, Copy)]
pub struct OnShellReport {
    pub torsion_residual: f64,
    pub transverse_residual: f64,
    pub hamiltonian_residual: f64,
}

impl OnShellReport {
    pub fn within(&self, tol: f64) -> bool {
        self.torsion_residual <= tol
            && self.transverse_residual <= tol
            && self.hamiltonian_residual <= tol
    }
}

/// Hamiltonian constraint density with unit multiplier. The degenerate
/// branch carries the transverse-torsion correction term and the `1/(N-3)`
/// weight on the curvature term; the nondegenerate branch has neither.
/// The transverse projection always uses the frozen site geometry, so
/// configurations perturbed away from the geometry's coframe are measured
/// with the base-point projection.
pub fn unit_hamiltonian_density<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
) -> LatticeResult<GridField<S>> {
    let n = config.bulk_dimension();
    let en = config.transversal_field();
    let curvature = config.curvature()?;
    let lam = S::from_f64_exact(config.cosmological) * S::ratio(1, factorial(n - 1));
    let volume = en
        .wedge(&config.coframe_power(n - 1)?)?
        .scale(&lam);

    let curvature_term = en
        .wedge(&config.coframe_power(n - 3)?)?
        .wedge(&curvature)?;
    if !geometry.degenerate() {
        return curvature_term.add(&volume);
    }

    let torsion = config.torsion()?;
    let transverse = GridField::from_values(
        torsion.degree(),
        (0..torsion.site_count())
            .map(|s| geometry.project_torsion(torsion.site(s)))
            .collect::<LatticeResult<_>>()?,
    )?;
    let correction = en
        .wedge(&config.coframe_power(n - 4)?)?
        .wedge(&config.connection_shift()?)?
        .wedge(&transverse)?;
    curvature_term
        .scale(&S::ratio(1, (n - 3) as i64))
        .sub(&correction)?
        .add(&volume)
}

pub const PAYLOAD_CONFIGURATION: &str = "configuration";
pub const PAYLOAD_LINEARIZED: &str = "linearized";

/// Parsed plain-text field container: a header (dimension, grid shape,
/// spacings, cosmological constant, payload kind) followed by named field
/// blocks with one coefficient row per site, axis 0 fastest.
///
/// ```text
/// dim 4
/// grid 2 2 2
/// spacing 1/2 1/2 1/2
/// lambda 0
/// payload configuration
/// field e
/// 1 0 0 0 0 1 0 0 0 0 1 1
/// ...
/// ```
///
/// Values use the same exact tokens as coframe fixtures: integers,
/// fractions `p/q`, or finite decimals.
#[derive(Debug, Clone)]
pub struct FieldTable {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    pub lambda: f64,
    pub payload: String,
    pub fields: Vec<(String, Vec<Vec<BigRational>>)>,
}

impl FieldTable {
    pub fn parse(text: &str) -> LatticeResult<Self> {
        let parse_err = |line: usize, message: String| LatticeError::Parse { line, message };
        let mut dim: Option<usize> = None;
        let mut shape: Option<Vec<usize>> = None;
        let mut spacing: Option<Vec<f64>> = None;
        let mut lambda: Option<f64> = None;
        let mut payload: Option<String> = None;
        let mut fields: Vec<(String, Vec<Vec<BigRational>>)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let mut words = content.split_whitespace();
            let key = words.next().expect("nonempty line");
            match key {
                "dim" => {
                    let rest = words.next().unwrap_or("");
                    dim = Some(rest.parse().map_err(|_| {
                        parse_err(line, format!("cannot parse dimension `{rest}`"))
                    })?);
                }
                "grid" => {
                    let extents: Vec<usize> = words
                        .map(|w| {
                            w.parse().map_err(|_| {
                                parse_err(line, format!("cannot parse grid extent `{w}`"))
                            })
                        })
                        .collect::<LatticeResult<_>>()?;
                    shape = Some(extents);
                }
                "spacing" => {
                    let values: Vec<f64> = words
                        .map(|w| {
                            parse_value(w, line)
                                .map(|r| Scalar::to_f64(&r))
                                .map_err(|_| {
                                    parse_err(line, format!("cannot parse spacing `{w}`"))
                                })
                        })
                        .collect::<LatticeResult<_>>()?;
                    spacing = Some(values);
                }
                "lambda" => {
                    let rest = words.next().unwrap_or("");
                    lambda = Some(
                        parse_value(rest, line)
                            .map(|r| Scalar::to_f64(&r))
                            .map_err(|_| {
                                parse_err(line, format!("cannot parse lambda `{rest}`"))
                            })?,
                    );
                }
                "payload" => {
                    payload = Some(words.next().unwrap_or("").to_string());
                }
                "field" => {
                    let name = words
                        .next()
                        .ok_or_else(|| parse_err(line, "field block without a name".into()))?;
                    fields.push((name.to_string(), Vec::new()));
                }
                _ => {
                    let entry = fields.last_mut().ok_or_else(|| {
                        parse_err(line, format!("value row `{content}` before any field block"))
                    })?;
                    let rows = &mut entry.1;
                    let row: Vec<BigRational> = content
                        .split_whitespace()
                        .map(|token| {
                            parse_value(token, line).map_err(|_| {
                                parse_err(line, format!("cannot parse value `{token}`"))
                            })
                        })
                        .collect::<LatticeResult<_>>()?;
                    rows.push(row);
                }
            }
        }

        let missing =
            |what: &str| LatticeError::Parse { line: 0, message: format!("missing `{what}` line") };
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let shape = shape.ok_or_else(|| missing("grid"))?;
        let spacing = spacing.ok_or_else(|| missing("spacing"))?;
        let lambda = lambda.ok_or_else(|| missing("lambda"))?;
        let payload = payload.ok_or_else(|| missing("payload"))?;
        let sites: usize = shape.iter().product();
        for (name, rows) in &fields {
            if rows.len() != sites {
                return Err(LatticeError::Parse {
                    line: 0,
                    message: format!(
                        "field `{name}` has {} rows, expected one per site ({sites})",
                        rows.len()
                    ),
                });
            }
        }
        Ok(Self {
            dim,
            shape,
            spacing,
            lambda,
            payload,
            fields,
        })
    }

    pub fn boundary(&self) -> LatticeResult<DiscreteBoundary> {
        DiscreteBoundary::new(self.shape.clone(), self.spacing.clone())
    }

    pub fn field(&self, name: &str) -> Option<&[Vec<BigRational>]> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, rows)| rows.as_slice())
    }

    /// Decodes one named block as a grid field of the given degree.
    pub fn grid_field<S: Scalar>(
        &self,
        name: &str,
        degree: FormDegree,
        boundary: &DiscreteBoundary,
    ) -> LatticeResult<GridField<S>> {
        let rows = self.field(name).ok_or_else(|| LatticeError::Parse {
            line: 0,
            message: format!("missing field block `{name}`"),
        })?;
        let want = degree.components();
        let values: Vec<FormField<S>> = rows
            .iter()
            .map(|row| {
                if row.len() != want {
                    return Err(LatticeError::Parse {
                        line: 0,
                        message: format!(
                            "field `{name}` rows carry {} values, degree {degree} needs {want}",
                            row.len()
                        ),
                    });
                }
                let coeffs = row.iter().map(|r| S::from_exact(r.clone())).collect();
                Ok(FormField::from_coeffs(degree, coeffs)?)
            })
            .collect::<LatticeResult<_>>()?;
        if values.len() != boundary.site_count() {
            return Err(LatticeError::SiteCountMismatch {
                expected: boundary.site_count(),
                got: values.len(),
            });
        }
        GridField::from_values(degree, values)
    }
}

/// Serialises named grid fields in the plain-text container format.
pub fn write_table<S: Scalar>(
    dim: usize,
    boundary: &DiscreteBoundary,
    lambda: f64,
    payload: &str,
    fields: &[(&str, &GridField<S>)],
) -> String {
    let mut out = String::new();
    out.push_str("# lattice field container\n");
    out.push_str(&format!("dim {dim}\n"));
    let shape: Vec<String> = boundary.shape().iter().map(usize::to_string).collect();
    out.push_str(&format!("grid {}\n", shape.join(" ")));
    let spacing: Vec<String> = boundary.spacing().iter().map(f64::to_string).collect();
    out.push_str(&format!("spacing {}\n", spacing.join(" ")));
    out.push_str(&format!("lambda {lambda}\n"));
    out.push_str(&format!("payload {payload}\n"));
    for (name, grid) in fields {
        out.push_str(&format!("field {name}\n"));
        for site in grid.sites() {
            let row: Vec<String> = site.coeffs().iter().map(value_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}
