//! Closure relations of the constraint algebra and the first/second class
//! split.
//!
//! The seven pointwise closure relations compare a Poisson bracket of two
//! smeared constraints against its closed form, which is again a linear
//! combination of smeared constraints with composite multipliers. On a
//! lightlike boundary three more brackets do not close on constraints;
//! their values are reproduced by independent site quadratures: the
//! torsion/torsion pairing density, its reduction of the
//! Hamiltonian/Hamiltonian bracket, and a curvature coupling term.
//!
//! The classification assembles the Gram matrix of brackets over a finite
//! multiplier basis, splits off the torsion block, and counts first and
//! second class constraints through its rank; the cancellation
//! `C + B^T D^{-1} B = 0` of the mixed block is reported as a residual.

use nalgebra::DMatrix;

use crate::forms::{FormDegree, FormField};
use crate::linalg::{dense_inverse, FloatAnalysis, RankPolicy};
use crate::scalar::Scalar;

use super::config::{FieldConfiguration, SiteGeometry};
use super::constraints::{
    covariant_lie_derivative, eval_constraint, hamiltonian_multiplier,
    hamiltonian_vector_field, inverted_bracket, poisson_bracket, Multiplier,
};
use super::{DiscreteBoundary, GridField, GridScalar, GridVector, LatticeError, LatticeResult};

/// One closure relation, as the two sides of the identity it asserts.
#[derive(Debug, Clone)]
pub struct RelationCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl RelationCheck {
    /// Relative residual, with an absolute floor of one on the scale.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residual() <= tol
    }
}

/// The smearing inputs for one round of closure checks.
#[derive(Debug, Clone)]
pub struct RelationInputs<S: Scalar> {
    pub alpha: GridField<S>,
    pub beta: GridField<S>,
    pub xi: GridVector<S>,
    pub eta: GridVector<S>,
    pub lambda: GridScalar<S>,
    pub lambda2: GridScalar<S>,
    /// Torsion multiplier; ignored on nondegenerate boundaries.
    pub tau: Option<GridField<S>>,
}

/// Splits a `(0,1)` grid field into frame components: the tangential part
/// as a coordinate vector field and the transversal coefficient.
pub fn frame_split<S: Scalar>(
    geometry: &SiteGeometry<S>,
    boundary: &DiscreteBoundary,
    z: &GridField<S>,
) -> LatticeResult<(GridVector<S>, GridScalar<S>)> {
    let base = geometry.coframe().boundary_dimension();
    let mut tangential = Vec::with_capacity(z.site_count());
    let mut transversal = Vec::with_capacity(z.site_count());
    for s in 0..z.site_count() {
        let expressed = geometry.coframe().express_in_frame(z.site(s))?;
        let mut comps = Vec::with_capacity(base);
        for a in 0..base {
            comps.push(expressed.coeff(&[], &[a as u8])?);
        }
        transversal.push(expressed.coeff(&[], &[base as u8])?);
        tangential.push(comps);
    }
    let components = GridVector::new(boundary, tangential)?;
    let scalar = GridScalar::new(boundary, transversal)?;
    Ok((components, scalar))
}

/// The composite multipliers generated when a gauge or diffeomorphism
/// constraint is bracketed with the Hamiltonian constraint: the frame
/// split of a `(0,1)` field `z` induces a diffeomorphism along its
/// tangential part, a gauge rotation by the contracted connection shift, a
/// rescaled Hamiltonian multiplier, and a torsion multiplier.
struct HamiltonianSideMultipliers<S: Scalar> {
    diffeo: GridVector<S>,
    gauge: GridField<S>,
    lapse: GridScalar<S>,
    torsion: Option<GridField<S>>,
}

fn hamiltonian_side<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    z: &GridField<S>,
) -> LatticeResult<HamiltonianSideMultipliers<S>> {
    let n = config.bulk_dimension();
    let (xi_z, lapse) = frame_split(geometry, config.boundary(), z)?;
    let shift = config.connection_shift()?;
    let gauge = shift.contract(&xi_z)?;
    let torsion = if geometry.degenerate() {
        let inner = config
            .coframe_field()
            .contract(&xi_z)?
            .wedge(&config.coframe_power(n - 4)?)?
            .wedge(&shift)?;
        let values = (0..inner.site_count())
            .map(|s| geometry.project_multiplier(inner.site(s)))
            .collect::<LatticeResult<Vec<_>>>()?;
        Some(GridField::from_values(inner.degree(), values)?)
    } else {
        None
    };
    Ok(HamiltonianSideMultipliers {
        diffeo: xi_z,
        gauge,
        lapse,
        torsion,
    })
}

/// Projects a multiplier-degree grid field sitewise onto the multiplier
/// space.
fn project_multiplier_grid<S: Scalar>(
    geometry: &SiteGeometry<S>,
    field: &GridField<S>,
) -> LatticeResult<GridField<S>> {
    let values = (0..field.site_count())
        .map(|s| geometry.project_multiplier(field.site(s)))
        .collect::<LatticeResult<Vec<_>>>()?;
    GridField::from_values(field.degree(), values)
}

/// Evaluates the closure relations available for the geometry's signature
/// class: gauge/gauge, gauge/diffeo, diffeo/diffeo, then
/// gauge/Hamiltonian and diffeo/Hamiltonian, plus the torsion relations on
/// lightlike boundaries and the vanishing Hamiltonian/Hamiltonian bracket
/// on nondegenerate ones.
pub fn closure_relations<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    inputs: &RelationInputs<S>,
    tol: f64,
) -> LatticeResult<Vec<RelationCheck>> {
    let boundary = config.boundary();
    let n = config.bulk_dimension();
    let omega_0 = config.reference_connection();
    let curvature_0 = config.reference_curvature()?;
    let mut checks = Vec::new();

    let bracket = |f: &Multiplier<S>, g: &Multiplier<S>| -> LatticeResult<f64> {
        Ok(Scalar::to_f64(&poisson_bracket(config, geometry, f, g, tol)?))
    };
    let eval = |m: &Multiplier<S>| -> LatticeResult<f64> {
        Ok(Scalar::to_f64(&eval_constraint(config, geometry, m)?))
    };

    let gauge_a = Multiplier::Gauge(inputs.alpha.clone());
    let gauge_b = Multiplier::Gauge(inputs.beta.clone());
    let diffeo_x = Multiplier::Diffeo(inputs.xi.clone());
    let diffeo_e = Multiplier::Diffeo(inputs.eta.clone());
    let lapse = Multiplier::Lapse(inputs.lambda.clone());

    checks.push(RelationCheck {
        name: "gauge-gauge closure",
        lhs: bracket(&gauge_a, &gauge_b)?,
        rhs: -eval(&Multiplier::Gauge(inputs.alpha.lie(&inputs.beta)?))?,
    });

    checks.push(RelationCheck {
        name: "gauge-diffeo closure",
        lhs: bracket(&gauge_a, &diffeo_x)?,
        rhs: eval(&Multiplier::Gauge(covariant_lie_derivative(
            boundary,
            omega_0,
            &inputs.xi,
            &inputs.alpha,
        )?))?,
    });

    let commutator = inputs.xi.lie_bracket(&inputs.eta, boundary)?;
    let curv_pull = curvature_0.contract(&inputs.eta)?.contract(&inputs.xi)?;
    checks.push(RelationCheck {
        name: "diffeo-diffeo closure",
        lhs: bracket(&diffeo_x, &diffeo_e)?,
        rhs: eval(&Multiplier::Diffeo(commutator))?
            - eval(&Multiplier::Gauge(curv_pull))?,
    });

    if let (true, Some(tau)) = (geometry.degenerate(), inputs.tau.as_ref()) {
        let torsion = Multiplier::Torsion(tau.clone());
        let rotated = project_multiplier_grid(geometry, &inputs.alpha.lie(tau)?)?;
        checks.push(RelationCheck {
            name: "gauge-torsion closure",
            lhs: bracket(&gauge_a, &torsion)?,
            rhs: -eval(&Multiplier::Torsion(rotated))?,
        });

        let dragged = project_multiplier_grid(
            geometry,
            &covariant_lie_derivative(boundary, omega_0, &inputs.xi, tau)?,
        )?;
        checks.push(RelationCheck {
            name: "diffeo-torsion closure",
            lhs: bracket(&diffeo_x, &torsion)?,
            rhs: eval(&Multiplier::Torsion(dragged))?,
        });
    }

    // Gauge/Hamiltonian: the closed form is generated by the frame split
    // of [alpha, lambda e_n].
    let lifted = config
        .transversal_field()
        .scale_by(inputs.lambda.values())?;
    let x_field = inputs.alpha.lie(&lifted)?;
    let x_side = hamiltonian_side(config, geometry, &x_field)?;
    let mut rhs = -eval(&Multiplier::Diffeo(x_side.diffeo.clone()))?
        + eval(&Multiplier::Gauge(x_side.gauge.clone()))?
        - eval(&Multiplier::Lapse(x_side.lapse.clone()))?;
    if let Some(torsion) = &x_side.torsion {
        rhs += eval(&Multiplier::Torsion(torsion.clone()))?;
        let twisted = lifted
            .wedge(&config.coframe_power(n - 4)?)?
            .wedge(&inputs.alpha.covariant_derivative(boundary, omega_0)?)?;
        rhs -= eval(&Multiplier::Torsion(project_multiplier_grid(
            geometry, &twisted,
        )?))?;
    }
    checks.push(RelationCheck {
        name: "gauge-hamiltonian closure",
        lhs: bracket(&gauge_a, &lapse)?,
        rhs,
    });

    // Diffeo/Hamiltonian: generated by the frame split of the covariant
    // Lie derivative of lambda e_n.
    let y_field = covariant_lie_derivative(boundary, omega_0, &inputs.xi, &lifted)?;
    let y_side = hamiltonian_side(config, geometry, &y_field)?;
    let mut rhs = eval(&Multiplier::Diffeo(y_side.diffeo.clone()))?
        - eval(&Multiplier::Gauge(y_side.gauge.clone()))?
        + eval(&Multiplier::Lapse(y_side.lapse.clone()))?;
    if let Some(torsion) = &y_side.torsion {
        rhs -= eval(&Multiplier::Torsion(torsion.clone()))?;
        let twisted = lifted
            .wedge(&config.coframe_power(n - 4)?)?
            .wedge(&curvature_0.contract(&inputs.xi)?)?;
        rhs += eval(&Multiplier::Torsion(project_multiplier_grid(
            geometry, &twisted,
        )?))?;
    }
    checks.push(RelationCheck {
        name: "diffeo-hamiltonian closure",
        lhs: bracket(&diffeo_x, &lapse)?,
        rhs,
    });

    if !geometry.degenerate() {
        checks.push(RelationCheck {
            name: "hamiltonian-hamiltonian closure",
            lhs: bracket(&lapse, &Multiplier::Lapse(inputs.lambda2.clone()))?,
            rhs: 0.0,
        });
    }

    Ok(checks)
}

/// Direct site quadrature of the torsion/torsion bracket,
/// `integral W^{-1}([tau_1, e]) d_omega tau_2  -  (1 <-> 2)`, bypassing
/// the stored vector fields.
pub fn torsion_pair_density<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    tau1: &GridField<S>,
    tau2: &GridField<S>,
) -> LatticeResult<S> {
    let boundary = config.boundary();
    let first = inverted_bracket(geometry, tau1)?
        .wedge(&tau2.covariant_derivative(boundary, config.connection())?)?
        .integrate(boundary)?;
    let second = inverted_bracket(geometry, tau2)?
        .wedge(&tau1.covariant_derivative(boundary, config.connection())?)?
        .integrate(boundary)?;
    Ok(first - second)
}

/// The two sides of the Hamiltonian/Hamiltonian reduction on a lightlike
/// boundary: the bracket of two lapses against the torsion/torsion
/// bracket of their induced multipliers.
pub fn hamiltonian_pair_reduction<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    lambda: &GridScalar<S>,
    mu: &GridScalar<S>,
    tol: f64,
) -> LatticeResult<(f64, f64)> {
    let lhs = poisson_bracket(
        config,
        geometry,
        &Multiplier::Lapse(lambda.clone()),
        &Multiplier::Lapse(mu.clone()),
        tol,
    )?;
    let tau_l = hamiltonian_multiplier(config, geometry, lambda)?;
    let tau_m = hamiltonian_multiplier(config, geometry, mu)?;
    let rhs = poisson_bracket(
        config,
        geometry,
        &Multiplier::Torsion(tau_l),
        &Multiplier::Torsion(tau_m),
        tol,
    )?;
    Ok((Scalar::to_f64(&lhs), Scalar::to_f64(&rhs)))
}

/// Null-frame component functions of a torsion multiplier at `N = 4`: the
/// two diagonal components and the two off-diagonal ones, read off after
/// expressing the fiber indices in the frame basis.
pub(crate) fn torsion_components_dim4<S: Scalar>(
    geometry: &SiteGeometry<S>,
    tau_site: &FormField<S>,
) -> LatticeResult<[S; 4]> {
    let expressed = geometry.coframe().express_in_frame(tau_site)?;
    // Diagonal: fiber (e_n, null, spatial k) against base axis k.
    let y1 = expressed.coeff_signed(&[1], &[3, 2, 1])?;
    let y2 = expressed.coeff_signed(&[0], &[3, 2, 0])?;
    // Off-diagonal: fiber spatial index against the other base axis.
    let x21 = expressed.coeff_signed(&[0], &[3, 2, 1])?;
    let x12 = expressed.coeff_signed(&[1], &[3, 2, 0])?;
    Ok([y1, y2, x21, x12])
}

/// Closed-form site quadrature of the torsion/torsion bracket at `N = 4`:
/// the component functions paired against their derivative along the null
/// axis, times the frame volume factor.
pub fn torsion_pair_closed_form_dim4<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    tau1: &GridField<S>,
    tau2: &GridField<S>,
) -> LatticeResult<f64> {
    let boundary = config.boundary();
    let n = geometry.coframe().bulk_dimension();
    let axis = boundary.dimension() - 1;
    let sites = boundary.site_count();

    let comps = |tau: &GridField<S>| -> LatticeResult<Vec<[S; 4]>> {
        (0..sites)
            .map(|s| torsion_components_dim4(geometry, tau.site(s)))
            .collect()
    };
    let c1 = comps(tau1)?;
    let c2 = comps(tau2)?;

    let h2 = 2.0 * boundary.spacing()[axis];
    let mut acc = 0.0f64;
    for s in 0..sites {
        let fwd = boundary.neighbor(s, axis, 1);
        let bwd = boundary.neighbor(s, axis, -1);
        let deriv = |c: &Vec<[S; 4]>, k: usize| {
            (Scalar::to_f64(&c[fwd][k]) - Scalar::to_f64(&c[bwd][k])) / h2
        };
        // Diagonal pairing plus the off-diagonal pairing with swapped
        // component slots.
        acc += Scalar::to_f64(&c1[s][0]) * deriv(&c2, 0)
            + Scalar::to_f64(&c1[s][1]) * deriv(&c2, 1)
            + Scalar::to_f64(&c1[s][2]) * deriv(&c2, 3)
            + Scalar::to_f64(&c1[s][3]) * deriv(&c2, 2);
    }

    let volume_form = geometry
        .coframe_power(n - 1)
        .wedge(geometry.coframe().transversal())?;
    let frame_volume = Scalar::to_f64(&volume_form.top_coefficient()?)
        / factorial(n - 1) as f64;
    Ok(acc * frame_volume * boundary.cell_volume())
}

/// Curvature coupling between a torsion multiplier and a lapse at
/// `N = 4`: the difference between their bracket and the torsion/torsion
/// reduction, as a closed-form site quadrature over frame components of
/// the curvature.
pub fn curvature_coupling_dim4<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    lambda: &GridScalar<S>,
    tau: &GridField<S>,
) -> LatticeResult<f64> {
    let boundary = config.boundary();
    let n = geometry.coframe().bulk_dimension();
    let sites = boundary.site_count();
    let curvature = config.curvature()?;

    let mut acc = 0.0f64;
    for s in 0..sites {
        let [y1, y2, x21, x12] = torsion_components_dim4(geometry, tau.site(s))?;
        let f = geometry.coframe().express_in_frame(curvature.site(s))?;
        // Diagonal curvature components (spatial k, null) over base
        // (axis k, null axis); then the mixed components.
        let f11 = f.coeff_signed(&[0, 2], &[0, 2])?;
        let f22 = f.coeff_signed(&[1, 2], &[1, 2])?;
        let f12 = f.coeff_signed(&[1, 2], &[0, 2])?;
        let f21 = f.coeff_signed(&[0, 2], &[1, 2])?;
        let site_value = 2.0
            * (Scalar::to_f64(&y1) * Scalar::to_f64(&f11)
                + Scalar::to_f64(&y2) * Scalar::to_f64(&f22))
            + Scalar::to_f64(&x21) * Scalar::to_f64(&f12)
            + Scalar::to_f64(&x12) * Scalar::to_f64(&f21);
        acc += Scalar::to_f64(lambda.site(s)) * site_value;
    }

    let volume_form = geometry
        .coframe_power(n - 1)
        .wedge(geometry.coframe().transversal())?;
    let frame_volume = Scalar::to_f64(&volume_form.top_coefficient()?)
        / factorial(n - 1) as f64;
    Ok(acc * frame_volume * boundary.cell_volume())
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// A finite basis of smeared constraints for the class split, with the
/// torsion block contiguous at the end.
#[derive(Debug)]
pub struct MultiplierBasis<S: Scalar> {
    pub labels: Vec<String>,
    pub elements: Vec<Multiplier<S>>,
    pub torsion_start: usize,
}

impl<S: Scalar> MultiplierBasis<S> {
    /// The pointwise generator basis: all constant internal bivectors, all
    /// constant coordinate vector fields, the unit lapse, and — on
    /// lightlike boundaries — the frozen multiplier basis modulated by
    /// `profile`.
    pub fn standard(
        config: &FieldConfiguration<S>,
        geometry: &SiteGeometry<S>,
        profile: &GridScalar<S>,
    ) -> LatticeResult<Self> {
        let boundary = config.boundary();
        let n = config.bulk_dimension();
        let base = boundary.dimension();
        let mut labels = Vec::new();
        let mut elements = Vec::new();

        let bivector_degree = FormDegree::new(base, n, 0, 2);
        for a in 0..n {
            for b in (a + 1)..n {
                let mut form = FormField::zero(bivector_degree);
                form.set(&[], &[a as u8, b as u8], S::one())?;
                labels.push(format!("gauge({a},{b})"));
                elements.push(Multiplier::Gauge(GridField::constant(boundary, form)));
            }
        }
        for mu in 0..base {
            let mut comps = vec![S::zero(); base];
            comps[mu] = S::one();
            labels.push(format!("diffeo({mu})"));
            elements.push(Multiplier::Diffeo(GridVector::constant(boundary, comps)?));
        }
        labels.push("lapse".to_string());
        elements.push(Multiplier::Lapse(GridScalar::constant(boundary, S::one())));

        let torsion_start = elements.len();
        if geometry.degenerate() {
            for (i, s_form) in geometry.multiplier_basis().iter().enumerate() {
                let grid = GridField::constant(boundary, s_form.clone())
                    .scale_by(profile.values())?;
                labels.push(format!("torsion({i})"));
                elements.push(Multiplier::Torsion(grid));
            }
        }

        Ok(Self {
            labels,
            elements,
            torsion_start,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// The bracket Gram matrix over a multiplier basis and the class counts
/// derived from it.
#[derive(Debug)]
pub struct BracketReport {
    pub labels: Vec<String>,
    pub gram: Vec<Vec<f64>>,
    pub torsion_start: usize,
    pub first_class: usize,
    pub second_class: usize,
    /// Sup norm of `C + B^T D^{-1} B` over the non-torsion block; zero
    /// when the mixed block is absorbed into first-class combinations.
    pub cancellation_residual: f64,
    /// Local degrees of freedom implied by the counts.
    pub dof: usize,
}

/// Computes the Gram matrix of brackets over `basis`, splits classes by
/// rank, and verifies the mixed-block cancellation. Fails with
/// [`LatticeError::DegenerateTorsionBlock`] when the torsion block is
/// singular over the chosen profile.
pub fn classify<S: Scalar>(
    config: &FieldConfiguration<S>,
    geometry: &SiteGeometry<S>,
    basis: &MultiplierBasis<S>,
    policy: &RankPolicy,
    tol: f64,
) -> LatticeResult<BracketReport> {
    let m = basis.len();
    let fields = basis
        .elements
        .iter()
        .map(|mult| hamiltonian_vector_field(config, geometry, mult, tol))
        .collect::<LatticeResult<Vec<_>>>()?;

    let sign = S::from_int(super::constraints::SYMPLECTIC_SIGN);
    let mut gram = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let value = super::constraints::symplectic_pairing(
                config.boundary(),
                &fields[i],
                &fields[j],
            )? * sign.clone();
            let v = Scalar::to_f64(&value);
            gram[i][j] = v;
            gram[j][i] = -v;
        }
    }

    let k = basis.torsion_start;
    let q = m - k;
    let mut cancellation = 0.0f64;
    if q > 0 {
        let d: Vec<Vec<f64>> = (k..m).map(|i| gram[i][k..m].to_vec()).collect();
        let d_matrix = DMatrix::from_fn(q, q, |r, c| d[r][c]);
        let d_rank = FloatAnalysis::new(d_matrix).rank(policy)?;
        if d_rank < q {
            return Err(LatticeError::DegenerateTorsionBlock);
        }
        let d_inverse = dense_inverse(&d).ok_or(LatticeError::DegenerateTorsionBlock)?;
        // C + B^T D^{-1} B over the non-torsion block.
        for r in 0..k {
            for c in 0..k {
                let mut corr = 0.0;
                for i in 0..q {
                    for j in 0..q {
                        corr += gram[k + i][r] * d_inverse[i][j] * gram[k + j][c];
                    }
                }
                cancellation = cancellation.max((gram[r][c] + corr).abs());
            }
        }
    }

    // The class counts are defined by the rank of the full Gram matrix;
    // the torsion-block rank above only gates the cancellation check.
    let full = DMatrix::from_fn(m, m, |r, c| gram[r][c]);
    let second_class = FloatAnalysis::new(full).rank(policy)?;
    let first_class = m - second_class;

    let n = config.bulk_dimension();
    let phase_dim = 2 * n * (n - 1);
    let dof = phase_dim - 2 * first_class - second_class;

    Ok(BracketReport {
        labels: basis.labels.clone(),
        gram,
        torsion_start: k,
        first_class,
        second_class,
        cancellation_residual: cancellation,
        dof,
    })
}

/// Second-order convergence probe: the same relation residual on a
/// refined grid should shrink by about the square of the spacing ratio.
pub fn refinement_ratio(coarse: f64, fine: f64) -> f64 {
    if fine == 0.0 {
        f64::INFINITY
    } else {
        coarse / fine
    }
}
