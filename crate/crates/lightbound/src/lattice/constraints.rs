//! Boundary constraint functionals, their Hamiltonian vector fields, and
//! the symplectic pairing between them.
//!
//! Four families of constraints act on a field configuration, one per
//! multiplier kind:
//!
//! * gauge rotations, smeared with an internal bivector `c`;
//! * boundary diffeomorphisms, smeared with a tangent vector field `xi`;
//! * the Hamiltonian constraint, smeared with a scalar `lambda`;
//! * on lightlike boundaries only, the residual torsion constraint,
//!   smeared with a multiplier valued in the frozen multiplier space.
//!
//! Every Hamiltonian vector field is stored through its coframe component
//! and the wedge of its connection component with `e^{N-3}`; only that
//! combination enters the symplectic pairing, and for the torsion and
//! Hamiltonian rows only that combination is determined.
//!
//! The torsion and Hamiltonian rows are implemented at torsion-free
//! configurations over the frozen geometry; away from that locus their
//! closed forms pick up extension-dependent corrections that this module
//! does not attempt to reconstruct, so construction fails loudly instead.

use crate::forms::FormDegree;
use crate::scalar::Scalar;

use super::config::{unit_hamiltonian_density, FieldConfiguration, SiteGeometry};
use super::{
    DiscreteBoundary, GridField, GridScalar, GridVector, LatticeError, LatticeResult,
};

/// Default gate below which a configuration counts as torsion-free.
pub const ON_SHELL_TOL: f64 = 1e-10;

/// Default step for central-difference directional derivatives.
pub const FD_STEP: f64 = 1e-6;

/// Overall sign relating the stored pairing to the Poisson bracket; fixed
/// once by the gauge-gauge closure relation and asserted by the suites.
pub const SYMPLECTIC_SIGN: i64 = 1;

/// A smearing multiplier for one constraint family.
#[derive(Debug, Clone)]
pub enum Multiplier<S: Scalar> {
    /// Internal bivector `c`, a `(0,2)` grid field.
    Gauge(GridField<S>),
    /// Tangent vector field `xi` on the boundary.
    Diffeo(GridVector<S>),
    /// Scalar multiplier `lambda`.
    Lapse(GridScalar<S>),
    /// `(N-3, N-1)`-valued multiplier with site values in the frozen
    /// multiplier space.
    Torsion(GridField<S>),
}

impl<S: Scalar> Multiplier<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            Multiplier::Gauge(_) => "gauge",
            Multiplier::Diffeo(_) => "diffeo",
            Multiplier::Lapse(_) => "lapse",
            Multiplier::Torsion(_) => "torsion",
        }
    }

    /// Structural checks: degrees, and for torsion multipliers membership
    /// of every site value in the frozen multiplier space.
    pub fn validate(
        &self,
        geometry: &SiteGeometry<S>,
        boundary: &DiscreteBoundary,
        tol: f64,
    ) -> LatticeResult<()> {
        let n = geometry.coframe().bulk_dimension();
        let base = geometry.coframe().boundary_dimension();
        match self {
            Multiplier::Gauge(c) => {
                let want = FormDegree::new(base, n, 0, 2);
                if c.degree() != want {
                    return Err(LatticeError::DegreeMismatch {
                        expected: want,
                        got: c.degree(),
                    });
                }
                check_sites(c.site_count(), boundary)
            }
            Multiplier::Diffeo(xi) => {
                check_sites(xi.site_count(), boundary)?;
                if xi.site(0).len() != base {
                    return Err(LatticeError::VectorLength {
                        expected: base,
                        got: xi.site(0).len(),
                    });
                }
                Ok(())
            }
            Multiplier::Lapse(l) => check_sites(l.values().len(), boundary),
            Multiplier::Torsion(tau) => {
                let want = FormDegree::new(base, n, n - 3, n - 1);
                if tau.degree() != want {
                    return Err(LatticeError::DegreeMismatch {
                        expected: want,
                        got: tau.degree(),
                    });
                }
                check_sites(tau.site_count(), boundary)?;
                for s in 0..tau.site_count() {
                    let residual = geometry.multiplier_membership_residual(tau.site(s))?;
                    if residual > tol {
                        return Err(LatticeError::MultiplierOffSubspace {
                            kind: "torsion",
                            index: s,
                            residual,
                        });
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_sites(got: usize, boundary: &DiscreteBoundary) -> LatticeResult<()> {
    if got != boundary.site_count() {
        return Err(LatticeError::SiteCountMismatch {
            expected: boundary.site_count(),
            got,
        });
    }
    Ok(())
}

/// Covariant Lie derivative of a grid field along a tangent vector field,
/// `iota_xi d_omega a - d_omega iota_xi a`.
pub fn covariant_lie_derivative<S: Scalar>(
    boundary: &DiscreteBoundary,
    connection: &GridField<S>,
    xi: &GridVector<S>,
    field: &GridField<S>,
) -> LatticeResult<GridField<S>> {
    let first = field.covariant_derivative(boundary, connection)?.contract(xi)?;
    let second = field.contract(xi)?.covariant_derivative(boundary, connection)?;
    first.sub(&second)
}

/// The multiplier-space part of `lambda e_n e^{N-4} (omega - omega_0)`:
/// the torsion multiplier induced by the Hamiltonian constraint on a
/// lightlike boundary.
pub fn hamiltonian_multiplier<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    lambda: &GridScalar<S>,
) -> LatticeResult<GridField<S>> {
    let n = config.bulk_dimension();
    let inner = config
        .transversal_field()
        .wedge(&config.coframe_power(n - 4)?)?
        .wedge(&config.connection_shift()?)?
        .scale_by(lambda.values())?;
    let values = (0..inner.site_count())
        .map(|s| geometry.project_multiplier(inner.site(s)))
        .collect::<LatticeResult<Vec<_>>>()?;
    GridField::from_values(inner.degree(), values)
}

/// Evaluates one smeared constraint on a configuration.
///
/// The frozen geometry supplies the transverse projection inside the
/// degenerate Hamiltonian constraint; all other ingredients come from the
/// configuration itself, so the value stays well defined for perturbed
/// fields and central differences of it are honest directional
/// derivatives.
pub fn eval_constraint<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    multiplier: &Multiplier<S>,
) -> LatticeResult<S> {
    let boundary = config.boundary();
    let n = config.bulk_dimension();
    match multiplier {
        Multiplier::Gauge(c) => c
            .wedge(&config.coframe_power(n - 3)?)?
            .wedge(&config.torsion()?)?
            .integrate(boundary),
        Multiplier::Diffeo(xi) => {
            let power = config.coframe_power(n - 3)?;
            let first = config
                .coframe_field()
                .contract(xi)?
                .wedge(&power)?
                .wedge(&config.curvature()?)?;
            let second = config
                .connection_shift()?
                .contract(xi)?
                .wedge(&power)?
                .wedge(&config.torsion()?)?;
            first.add(&second)?.integrate(boundary)
        }
        Multiplier::Lapse(lambda) => unit_hamiltonian_density(config, geometry)?
            .scale_by(lambda.values())?
            .integrate(boundary),
        Multiplier::Torsion(tau) => tau.wedge(&config.torsion()?)?.integrate(boundary),
    }
}

/// A Hamiltonian vector field in the storage the pairing needs: the
/// coframe component and `e^{N-3}` wedge the connection component. The raw
/// connection component is kept when the constraint determines it (gauge
/// and diffeomorphism rows).
#[derive(Debug, Clone)]
pub struct HamiltonianField<S: Scalar> {
    pub x_e: GridField<S>,
    pub x_omega_weighted: GridField<S>,
    pub x_omega: Option<GridField<S>>,
}

impl<S: Scalar> HamiltonianField<S> {
    /// The flow direction `(x_e, x_omega)` when the raw connection
    /// component is available.
    pub fn tangent(&self) -> Option<TangentDirection<S>> {
        self.x_omega.as_ref().map(|omega| TangentDirection {
            d_e: self.x_e.clone(),
            d_omega: omega.clone(),
        })
    }
}

/// A tangent direction on the space of configurations: paired variations
/// of the coframe and the connection.
#[derive(Debug, Clone)]
pub struct TangentDirection<S: Scalar> {
    pub d_e: GridField<S>,
    pub d_omega: GridField<S>,
}

impl<S: Scalar> TangentDirection<S> {
    /// Weighted storage of the same direction, for pairing against a
    /// Hamiltonian vector field.
    pub fn weighted(&self, config: &FieldConfiguration<S>) -> LatticeResult<HamiltonianField<S>> {
        let n = config.bulk_dimension();
        let weighted = config.coframe_power(n - 3)?.wedge(&self.d_omega)?;
        Ok(HamiltonianField {
            x_e: self.d_e.clone(),
            x_omega_weighted: weighted,
            x_omega: Some(self.d_omega.clone()),
        })
    }
}

/// Verifies that the configuration is torsion-free and matches the frozen
/// geometry site by site; the torsion and Hamiltonian rows require both.
fn require_on_shell<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    tol: f64,
) -> LatticeResult<()> {
    let torsion = config.torsion()?;
    for s in 0..torsion.site_count() {
        let residual = torsion.site(s).sup_norm();
        if residual > tol {
            return Err(LatticeError::OffShell { site: s, residual });
        }
    }
    let e_ref = geometry.coframe().coframe();
    let en_ref = geometry.coframe().transversal();
    for s in 0..config.coframe_field().site_count() {
        let de = config.coframe_field().site(s).sub(e_ref)?.sup_norm();
        let dn = config.transversal_field().site(s).sub(en_ref)?.sup_norm();
        let residual = de.max(dn);
        if residual > tol {
            return Err(LatticeError::GeometryMismatch { site: s, residual });
        }
    }
    Ok(())
}

/// Applies the restricted wedge inverse sitewise to a multiplier-valued
/// grid field, producing the `(1,1)` coframe component `W^{-1}([tau, e])`.
pub(crate) fn inverted_bracket<S: Scalar>(
    geometry: &SiteGeometry<S>,
    tau: &GridField<S>,
) -> LatticeResult<GridField<S>> {
    let inverter = geometry.inverter().ok_or(LatticeError::RestrictedInverse {
        site: 0,
        message: "the restricted wedge inverse requires a lightlike boundary".into(),
    })?;
    let values = (0..tau.site_count())
        .map(|s| {
            inverter
                .apply(tau.site(s))
                .map_err(|err| LatticeError::RestrictedInverse {
                    site: s,
                    message: err.to_string(),
                })
        })
        .collect::<LatticeResult<Vec<_>>>()?;
    let degree = values[0].degree();
    GridField::from_values(degree, values)
}

/// Builds the Hamiltonian vector field of one smeared constraint.
///
/// The gauge and diffeomorphism rows hold for every configuration. The
/// torsion and Hamiltonian rows are only constructed at torsion-free
/// configurations matching the frozen geometry (within `tol`); elsewhere
/// they would pick up extension-dependent corrections and the call fails
/// with [`LatticeError::OffShell`] or [`LatticeError::GeometryMismatch`].
pub fn hamiltonian_vector_field<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    multiplier: &Multiplier<S>,
    tol: f64,
) -> LatticeResult<HamiltonianField<S>> {
    let boundary = config.boundary();
    let n = config.bulk_dimension();
    match multiplier {
        Multiplier::Gauge(c) => {
            let x_e = c.lie(config.coframe_field())?;
            let x_omega = c.covariant_derivative(boundary, config.connection())?;
            let weighted = config.coframe_power(n - 3)?.wedge(&x_omega)?;
            Ok(HamiltonianField {
                x_e,
                x_omega_weighted: weighted,
                x_omega: Some(x_omega),
            })
        }
        Multiplier::Diffeo(xi) => {
            let omega_0 = config.reference_connection();
            let minus_one = S::from_int(-1);
            let x_e = covariant_lie_derivative(boundary, omega_0, xi, config.coframe_field())?
                .scale(&minus_one);
            let shift = config.connection_shift()?;
            let lie_shift = covariant_lie_derivative(boundary, omega_0, xi, &shift)?;
            let curv_pull = config.reference_curvature()?.contract(xi)?;
            let x_omega = lie_shift.add(&curv_pull)?.scale(&minus_one);
            let weighted = config.coframe_power(n - 3)?.wedge(&x_omega)?;
            Ok(HamiltonianField {
                x_e,
                x_omega_weighted: weighted,
                x_omega: Some(x_omega),
            })
        }
        Multiplier::Torsion(tau) => {
            require_on_shell(config, geometry, tol)?;
            let x_e = inverted_bracket(geometry, tau)?;
            let x_omega_weighted = tau.covariant_derivative(boundary, config.connection())?;
            Ok(HamiltonianField {
                x_e,
                x_omega_weighted,
                x_omega: None,
            })
        }
        Multiplier::Lapse(lambda) => {
            require_on_shell(config, geometry, tol)?;
            let en = config.transversal_field();
            let lifted = en.scale_by(lambda.values())?;
            let d_lifted = lifted.covariant_derivative(boundary, config.connection())?;
            let lam_factor = S::from_f64_exact(config.cosmological())
                * S::ratio(1, factorial(n - 2));
            if geometry.degenerate() {
                let tau_prime = hamiltonian_multiplier(config, geometry, lambda)?;
                let x_e = d_lifted
                    .scale(&S::ratio(1, (n - 3) as i64))
                    .sub(&inverted_bracket(geometry, &tau_prime)?)?;
                let curv_term = lifted
                    .wedge(&config.coframe_power(n - 4)?)?
                    .wedge(&config.curvature()?)?;
                let volume_term = lifted
                    .wedge(&config.coframe_power(n - 2)?)?
                    .scale(&lam_factor);
                let d_tau = tau_prime.covariant_derivative(boundary, config.connection())?;
                let x_omega_weighted = curv_term.add(&volume_term)?.sub(&d_tau)?;
                Ok(HamiltonianField {
                    x_e,
                    x_omega_weighted,
                    x_omega: None,
                })
            } else {
                let x_e = d_lifted;
                let curv_term = lifted
                    .wedge(&config.coframe_power(n - 4)?)?
                    .wedge(&config.curvature()?)?
                    .scale(&S::from_int((n - 3) as i64));
                let volume_term = lifted
                    .wedge(&config.coframe_power(n - 2)?)?
                    .scale(&lam_factor);
                let x_omega_weighted = curv_term.add(&volume_term)?;
                Ok(HamiltonianField {
                    x_e,
                    x_omega_weighted,
                    x_omega: None,
                })
            }
        }
    }
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// The symplectic pairing of two stored vector fields,
/// `sum_sites top(x_e ^ y_weighted) - top(y_e ^ x_weighted)` times the
/// cell volume.
pub fn symplectic_pairing<S: Scalar>(
    boundary: &DiscreteBoundary,
    x: &HamiltonianField<S>,
    y: &HamiltonianField<S>,
) -> LatticeResult<S> {
    let first = x.x_e.wedge(&y.x_omega_weighted)?.integrate(boundary)?;
    let second = y.x_e.wedge(&x.x_omega_weighted)?.integrate(boundary)?;
    Ok(first - second)
}

/// Poisson bracket of two constraints through their Hamiltonian vector
/// fields, with the frozen overall sign.
pub fn poisson_bracket<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    f: &Multiplier<S>,
    g: &Multiplier<S>,
    tol: f64,
) -> LatticeResult<S> {
    let xf = hamiltonian_vector_field(config, geometry, f, tol)?;
    let xg = hamiltonian_vector_field(config, geometry, g, tol)?;
    let paired = symplectic_pairing(config.boundary(), &xf, &xg)?;
    Ok(paired * S::from_int(SYMPLECTIC_SIGN))
}

/// Central-difference directional derivative of a constraint along a
/// tangent direction: `(G(phi + t Y) - G(phi - t Y)) / 2t`.
pub fn directional_derivative<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    multiplier: &Multiplier<S>,
    direction: &TangentDirection<S>,
    step: f64,
) -> LatticeResult<f64> {
    let plus = shifted(config, direction, step)?;
    let minus = shifted(config, direction, -step)?;
    let gp = eval_constraint(&plus, geometry, multiplier)?;
    let gm = eval_constraint(&minus, geometry, multiplier)?;
    Ok((Scalar::to_f64(&gp) - Scalar::to_f64(&gm)) / (2.0 * step))
}

/// The configuration displaced by `t` along a tangent direction.
pub fn shifted<S: Scalar>(
    config: &FieldConfiguration<S>,
    direction: &TangentDirection<S>,
    t: f64,
) -> LatticeResult<FieldConfiguration<S>> {
    let step = S::from_f64_exact(t);
    let e = config.coframe_field().add(&direction.d_e.scale(&step))?;
    let omega = config.connection().add(&direction.d_omega.scale(&step))?;
    FieldConfiguration::new(
        config.boundary().clone(),
        e,
        config.transversal_field().clone(),
        omega,
        config.reference_connection().clone(),
        config.cosmological(),
    )
}
