use std::f64::consts::TAU;

use num::rational::BigRational;
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coframe::sample::{canonical_lightlike, identity_coframe, sheared_lightlike};
use crate::forms::{FormDegree, FormField};
use crate::linalg::RankPolicy;

use super::bracket::{
    classify, closure_relations, curvature_coupling_dim4, hamiltonian_pair_reduction,
    torsion_components_dim4, torsion_pair_closed_form_dim4, torsion_pair_density,
    MultiplierBasis, RelationInputs,
};
use super::config::{FieldConfiguration, FieldTable, SiteGeometry};
use super::constraints::{
    directional_derivative, eval_constraint, hamiltonian_multiplier, hamiltonian_vector_field,
    poisson_bracket, symplectic_pairing, Multiplier, TangentDirection,
};
use super::*;

type Q = BigRational;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dyadic(rng: &mut ChaCha8Rng) -> Q {
    Q::new(
        rng.gen_range(-8i64..=8).into(),
        (1i64 << rng.gen_range(0..3)).into(),
    )
}

fn rational_form(rng: &mut ChaCha8Rng, degree: FormDegree) -> FormField<Q> {
    let coeffs = (0..degree.components()).map(|_| dyadic(rng)).collect();
    FormField::from_coeffs(degree, coeffs).unwrap()
}

fn rational_grid(
    rng: &mut ChaCha8Rng,
    boundary: &DiscreteBoundary,
    degree: FormDegree,
) -> GridField<Q> {
    GridField::from_fn(boundary, degree, |_| rational_form(rng, degree)).unwrap()
}

fn exact_boundary(shape: &[usize]) -> DiscreteBoundary {
    DiscreteBoundary::new(shape.to_vec(), vec![0.5; shape.len()]).unwrap()
}

/// `sin(2 pi (freq . x) + phase)` over the unit torus.
fn wave(boundary: &DiscreteBoundary, s: usize, freq: &[i32], phase: f64) -> f64 {
    let mut arg = phase;
    for (axis, &f) in freq.iter().enumerate() {
        arg += TAU * f64::from(f) * boundary.coordinate(s, axis);
    }
    arg.sin()
}

fn float_form(rng: &mut ChaCha8Rng, degree: FormDegree) -> FormField<f64> {
    let coeffs = (0..degree.components())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    FormField::from_coeffs(degree, coeffs).unwrap()
}

/// A smooth periodic grid field: two random constant forms modulated by
/// random low-frequency waves.
fn smooth_grid(
    rng: &mut ChaCha8Rng,
    boundary: &DiscreteBoundary,
    degree: FormDegree,
) -> GridField<f64> {
    let a = float_form(rng, degree);
    let b = float_form(rng, degree);
    let fa: Vec<i32> = (0..boundary.dimension())
        .map(|_| rng.gen_range(-1..=1))
        .collect();
    let fb: Vec<i32> = (0..boundary.dimension())
        .map(|_| rng.gen_range(-1..=1))
        .collect();
    let (pa, pb) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
    GridField::from_fn(boundary, degree, |s| {
        a.scale(&wave(boundary, s, &fa, pa))
            .add(&b.scale(&wave(boundary, s, &fb, pb)))
            .unwrap()
    })
    .unwrap()
}

fn smooth_scalar(rng: &mut ChaCha8Rng, boundary: &DiscreteBoundary) -> GridScalar<f64> {
    let freq: Vec<i32> = (0..boundary.dimension())
        .map(|_| rng.gen_range(-1..=1))
        .collect();
    let phase = rng.gen_range(0.0..TAU);
    let amp = rng.gen_range(0.2..0.6);
    GridScalar::from_fn(boundary, |s| 1.0 + amp * wave(boundary, s, &freq, phase))
}

fn smooth_vector(rng: &mut ChaCha8Rng, boundary: &DiscreteBoundary) -> GridVector<f64> {
    let dim = boundary.dimension();
    let freqs: Vec<Vec<i32>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1..=1)).collect())
        .collect();
    let phases: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..TAU)).collect();
    GridVector::from_fn(boundary, |s| {
        (0..dim)
            .map(|a| 0.5 * wave(boundary, s, &freqs[a], phases[a]))
            .collect()
    })
    .unwrap()
}

/// A site-varying connection valued in the frozen flat-connection kernel,
/// so a constant coframe stays exactly torsion-free while the curvature is
/// generically nonzero.
fn flat_connection(
    rng: &mut ChaCha8Rng,
    geometry: &SiteGeometry<f64>,
    boundary: &DiscreteBoundary,
) -> GridField<f64> {
    let basis = geometry.flat_connection_basis();
    let degree = basis[0].degree();
    let picks: Vec<(FormField<f64>, Vec<i32>, f64)> = basis
        .iter()
        .take(3)
        .map(|form| {
            let freq: Vec<i32> = (0..boundary.dimension())
                .map(|_| rng.gen_range(-1..=1))
                .collect();
            (form.clone(), freq, rng.gen_range(0.0..TAU))
        })
        .collect();
    GridField::from_fn(boundary, degree, |s| {
        let mut acc = FormField::zero(degree);
        for (form, freq, phase) in &picks {
            acc = acc.add(&form.scale(&wave(boundary, s, freq, *phase))).unwrap();
        }
        acc
    })
    .unwrap()
}

/// A torsion multiplier: frozen multiplier-space basis forms modulated by
/// smooth profiles (varying along the null axis unless `freqs` says
/// otherwise).
fn smooth_torsion(
    rng: &mut ChaCha8Rng,
    geometry: &SiteGeometry<f64>,
    boundary: &DiscreteBoundary,
) -> GridField<f64> {
    let basis = geometry.multiplier_basis();
    let degree = basis[0].degree();
    let picks: Vec<(FormField<f64>, Vec<i32>, f64)> = basis
        .iter()
        .map(|form| {
            let mut freq = vec![0i32; boundary.dimension()];
            let null_axis = boundary.dimension() - 1;
            freq[null_axis] = rng.gen_range(1..=2);
            freq[rng.gen_range(0..null_axis)] = rng.gen_range(-1..=1);
            (form.clone(), freq, rng.gen_range(0.0..TAU))
        })
        .collect();
    GridField::from_fn(boundary, degree, |s| {
        let mut acc = FormField::zero(degree);
        for (form, freq, phase) in &picks {
            acc = acc.add(&form.scale(&wave(boundary, s, freq, *phase))).unwrap();
        }
        acc
    })
    .unwrap()
}

/// The reference on-shell configuration: constant canonical lightlike
/// coframe, vanishing connection, zero cosmological constant, and a
/// reference connection varying along the null coordinate. Torsion-free
/// with identically zero Hamiltonian density, yet with a nonzero induced
/// torsion multiplier.
fn null_varying_fixture(
    shape: &[usize],
    seed: u64,
) -> (SiteGeometry<f64>, FieldConfiguration<f64>) {
    let mut rng = rng(seed);
    let boundary = DiscreteBoundary::unit_torus(shape.to_vec()).unwrap();
    let coframe = canonical_lightlike::<f64>(4).unwrap();
    let geometry = SiteGeometry::build(coframe, &RankPolicy::default()).unwrap();
    let degree = FormDegree::new(3, 4, 1, 2);
    let omega = GridField::zero(&boundary, degree);
    let a = float_form(&mut rng, degree);
    let b = float_form(&mut rng, degree);
    let omega_0 = GridField::from_fn(&boundary, degree, |s| {
        a.scale(&wave(&boundary, s, &[0, 0, 1], 0.3))
            .add(&b.scale(&wave(&boundary, s, &[1, 0, 1], 1.1)))
            .unwrap()
    })
    .unwrap();
    let config = FieldConfiguration::from_constant_coframe(
        boundary,
        geometry.coframe(),
        omega,
        omega_0,
        0.0,
    )
    .unwrap();
    (geometry, config)
}

/// Torsion-free configuration with curvature: constant canonical lightlike
/// coframe and a connection valued in the flat kernel.
fn flat_curved_fixture(
    shape: &[usize],
    lambda: f64,
    seed: u64,
) -> (SiteGeometry<f64>, FieldConfiguration<f64>) {
    let mut rng = rng(seed);
    let boundary = DiscreteBoundary::unit_torus(shape.to_vec()).unwrap();
    let coframe = canonical_lightlike::<f64>(4).unwrap();
    let geometry = SiteGeometry::build(coframe, &RankPolicy::default()).unwrap();
    let omega = flat_connection(&mut rng, &geometry, &boundary);
    let omega_0 = flat_connection(&mut rng, &geometry, &boundary).scale(&0.4);
    let config = FieldConfiguration::from_constant_coframe(
        boundary,
        geometry.coframe(),
        omega,
        omega_0,
        lambda,
    )
    .unwrap();
    (geometry, config)
}

// ---------------------------------------------------------------------------
// Discrete calculus.

#[test]
fn summation_by_parts_is_exact_over_rationals() {
    let boundary = exact_boundary(&[4, 3, 5]);
    let mut rng = rng(11);
    let f = GridScalar::from_fn(&boundary, |_| dyadic(&mut rng));
    let g = GridScalar::from_fn(&boundary, |_| dyadic(&mut rng));
    for axis in 0..3 {
        let defect = sbp_defect(&boundary, &f, &g, axis);
        assert!(defect.is_zero(), "axis {axis}: defect {defect}");
    }
}

#[test]
fn centered_difference_is_skew_adjoint_exactly() {
    let boundary = exact_boundary(&[4, 3, 5]);
    let mut rng = rng(12);
    let degree = FormDegree::new(3, 4, 0, 0);
    let f = rational_grid(&mut rng, &boundary, degree);
    let g = rational_grid(&mut rng, &boundary, degree);
    for axis in 0..3 {
        let df = f.difference(&boundary, axis, Stencil::Centered);
        let dg = g.difference(&boundary, axis, Stencil::Centered);
        let mut acc = Q::zero();
        for s in 0..boundary.site_count() {
            acc += &df.site(s).coeffs()[0] * &g.site(s).coeffs()[0];
            acc += &f.site(s).coeffs()[0] * &dg.site(s).coeffs()[0];
        }
        assert!(acc.is_zero(), "axis {axis}: pairing defect {acc}");
    }
}

#[test]
fn exterior_derivative_squares_to_zero_exactly() {
    let boundary = exact_boundary(&[4, 3, 5]);
    let mut rng = rng(13);
    for degree in [FormDegree::new(3, 4, 0, 1), FormDegree::new(3, 4, 1, 2)] {
        let x = rational_grid(&mut rng, &boundary, degree);
        let ddx = x
            .exterior_derivative(&boundary)
            .unwrap()
            .exterior_derivative(&boundary)
            .unwrap();
        assert!(ddx.is_zero(), "d^2 != 0 on degree {degree}");
    }
}

#[test]
fn integral_of_exact_form_vanishes_exactly() {
    let boundary = exact_boundary(&[4, 3, 5]);
    let mut rng = rng(14);
    let x = rational_grid(&mut rng, &boundary, FormDegree::new(3, 4, 2, 4));
    let total = x
        .exterior_derivative(&boundary)
        .unwrap()
        .integrate(&boundary)
        .unwrap();
    assert!(total.is_zero(), "integral of d(x) = {total}");
}

#[test]
fn covariant_derivative_with_zero_connection_is_exterior() {
    let boundary = exact_boundary(&[3, 3, 3]);
    let mut rng = rng(15);
    let degree = FormDegree::new(3, 4, 1, 1);
    let x = rational_grid(&mut rng, &boundary, degree);
    let omega = GridField::zero(&boundary, FormDegree::new(3, 4, 1, 2));
    let lhs = x.covariant_derivative(&boundary, &omega).unwrap();
    let rhs = x.exterior_derivative(&boundary).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn curvature_convention_satisfies_bianchi_at_second_order() {
    // d_omega d_omega x = F ^ x (in the fiber action) fails on the lattice
    // only through the product rule of the centered stencil, so the sup
    // residual must shrink like h^2 under refinement. A wrong quadratic
    // coefficient in F would leave an O(1) residual.
    let residual = |k: usize, seed: u64| {
        let boundary = DiscreteBoundary::unit_torus(vec![k, k, k]).unwrap();
        let mut rng = rng(seed);
        let omega = smooth_grid(&mut rng, &boundary, FormDegree::new(3, 4, 1, 2));
        let x = smooth_grid(&mut rng, &boundary, FormDegree::new(3, 4, 1, 1));
        let twice = x
            .covariant_derivative(&boundary, &omega)
            .unwrap()
            .covariant_derivative(&boundary, &omega)
            .unwrap();
        let curv = super::config::curvature_of(&boundary, &omega).unwrap();
        twice.sub(&curv.lie(&x).unwrap()).unwrap().sup_norm()
    };
    let coarse = residual(6, 21);
    let fine = residual(12, 21);
    assert!(coarse > 1e-6, "test degenerate: coarse residual {coarse:.3e}");
    let ratio = coarse / fine;
    assert!(
        ratio > 3.0 && ratio < 5.5,
        "expected quadratic decay, got {coarse:.3e} -> {fine:.3e} (ratio {ratio:.2})"
    );
}

#[test]
fn vector_field_bracket_matches_directional_differences() {
    let boundary = exact_boundary(&[4, 3, 5]);
    let mut rng = rng(16);
    let constant = GridVector::constant(
        &boundary,
        vec![dyadic(&mut rng), dyadic(&mut rng), dyadic(&mut rng)],
    )
    .unwrap();
    let varying = GridVector::from_fn(&boundary, |_| {
        vec![dyadic(&mut rng), dyadic(&mut rng), dyadic(&mut rng)]
    })
    .unwrap();

    let self_bracket = constant.lie_bracket(&constant, &boundary).unwrap();
    for s in 0..boundary.site_count() {
        assert!(self_bracket.site(s).iter().all(Zero::is_zero));
    }

    // Against a constant field X the bracket is the directional derivative
    // of the varying one: [X, Y]^a = X^b D0_b Y^a.
    let bracket = constant.lie_bracket(&varying, &boundary).unwrap();
    let h2 = Q::new(1.into(), 1.into());
    for s in 0..boundary.site_count() {
        for a in 0..3 {
            let mut expect = Q::zero();
            for axis in 0..3 {
                let fwd = boundary.neighbor(s, axis, 1);
                let bwd = boundary.neighbor(s, axis, -1);
                let diff = (&varying.site(fwd)[a] - &varying.site(bwd)[a]) / &h2;
                expect += &constant.site(s)[axis] * diff;
            }
            assert_eq!(bracket.site(s)[a], expect, "site {s} component {a}");
        }
    }
}

// ---------------------------------------------------------------------------
// Container format.

#[test]
fn configuration_text_round_trip_is_exact() {
    let boundary = exact_boundary(&[2, 2, 2]);
    let mut rng = rng(31);
    let coframe = canonical_lightlike::<Q>(4).unwrap();
    let omega = rational_grid(&mut rng, &boundary, FormDegree::new(3, 4, 1, 2));
    let omega_0 = rational_grid(&mut rng, &boundary, FormDegree::new(3, 4, 1, 2));
    let config =
        FieldConfiguration::from_constant_coframe(boundary, &coframe, omega, omega_0, 0.25)
            .unwrap();
    let text = config.to_text();
    let back = FieldConfiguration::<Q>::from_text(&text).unwrap();
    assert_eq!(back.cosmological(), 0.25);
    for s in 0..config.boundary().site_count() {
        assert_eq!(config.coframe_field().site(s), back.coframe_field().site(s));
        assert_eq!(config.connection().site(s), back.connection().site(s));
        assert_eq!(
            config.reference_connection().site(s),
            back.reference_connection().site(s)
        );
    }
}

#[test]
fn container_parse_rejects_malformed_input() {
    let missing_dim = "grid 2 2 2\nspacing 1/2 1/2 1/2\nlambda 0\npayload configuration\n";
    assert!(matches!(
        FieldTable::parse(missing_dim),
        Err(LatticeError::Parse { .. })
    ));

    let stray_row = "dim 4\ngrid 2 2 2\nspacing 1/2 1/2 1/2\nlambda 0\npayload x\n1 2 3\n";
    assert!(matches!(
        FieldTable::parse(stray_row),
        Err(LatticeError::Parse { .. })
    ));

    let short_field =
        "dim 4\ngrid 2 2 2\nspacing 1/2 1/2 1/2\nlambda 0\npayload x\nfield e\n1 0\n";
    assert!(matches!(
        FieldTable::parse(short_field),
        Err(LatticeError::Parse { .. })
    ));
}

// ---------------------------------------------------------------------------
// Frozen site geometry.

#[test]
fn multiplier_projection_is_adjoint_to_torsion_projection() {
    let coframe = canonical_lightlike::<Q>(4).unwrap();
    let geometry = SiteGeometry::build(coframe, &RankPolicy::default()).unwrap();
    assert!(geometry.degenerate());
    assert_eq!(geometry.multiplier_basis().len(), 2);
    assert_eq!(geometry.torsion_basis().len(), 2);

    // The adjoint identity requires the multiplier basis to annihilate the
    // complement of the torsion space under the wedge pairing.
    let (forward, _backward) = geometry.annihilator_residuals();
    assert_eq!(forward, 0.0, "multiplier/complement wedge residual");

    let mut rng = rng(41);
    let x_degree = FormDegree::new(3, 4, 1, 3);
    let a_degree = FormDegree::new(3, 4, 2, 1);
    for _ in 0..10 {
        let x = rational_form(&mut rng, x_degree);
        let a = rational_form(&mut rng, a_degree);
        let px = geometry.project_multiplier(&x).unwrap();
        let pa = geometry.project_torsion(&a).unwrap();
        // Idempotency in both factors.
        assert_eq!(geometry.project_multiplier(&px).unwrap(), px);
        assert_eq!(geometry.project_torsion(&pa).unwrap(), pa);
        // top(p_S x ^ a) = top(x ^ p_T a).
        let lhs = px.wedge(&a).unwrap().top_coefficient().unwrap();
        let rhs = x.wedge(&pa).unwrap().top_coefficient().unwrap();
        assert_eq!(lhs, rhs, "adjoint pairing identity");
    }

    for s in geometry.multiplier_basis() {
        assert_eq!(&geometry.project_multiplier(s).unwrap(), s);
        assert_eq!(geometry.multiplier_membership_residual(s).unwrap(), 0.0);
    }
    let off = rational_form(&mut rng, x_degree);
    if geometry.project_multiplier(&off).unwrap() != off {
        assert!(geometry.multiplier_membership_residual(&off).unwrap() > 0.0);
    }
}

#[test]
fn nondegenerate_geometry_has_no_degenerate_sector() {
    let coframe = identity_coframe::<Q>(4).unwrap();
    let geometry = SiteGeometry::build(coframe, &RankPolicy::default()).unwrap();
    assert!(!geometry.degenerate());
    assert!(geometry.inverter().is_none());
    assert!(geometry.fixer().is_none());
    assert!(geometry.multiplier_basis().is_empty());
    assert!(geometry.torsion_basis().is_empty());
    assert!(!geometry.flat_connection_basis().is_empty());
    let x = rational_form(&mut rng(42), FormDegree::new(3, 4, 1, 3));
    assert!(geometry.project_multiplier(&x).unwrap().is_zero());
    assert!(geometry.coframe_power(0).degree().form == 0);
}

#[test]
fn flat_connections_keep_constant_coframe_torsion_free() {
    let coframe = canonical_lightlike::<Q>(4).unwrap();
    let geometry = SiteGeometry::build(coframe, &RankPolicy::default()).unwrap();
    let boundary = exact_boundary(&[3, 3, 4]);
    let basis = geometry.flat_connection_basis();
    assert!(!basis.is_empty());
    let mut rng = rng(43);
    let degree = basis[0].degree();
    let omega = GridField::from_fn(&boundary, degree, |_| {
        let mut acc = FormField::zero(degree);
        for b in basis {
            acc = acc.add(&b.scale(&dyadic(&mut rng))).unwrap();
        }
        acc
    })
    .unwrap();
    let config = FieldConfiguration::from_constant_coframe(
        boundary,
        geometry.coframe(),
        omega,
        GridField::zero(&exact_boundary(&[3, 3, 4]), degree),
        0.0,
    )
    .unwrap();
    assert!(config.torsion().unwrap().is_zero(), "torsion must vanish exactly");
    assert!(
        !config.curvature().unwrap().is_zero(),
        "flat-kernel connections should still curve"
    );
    // All torsion-linear constraints vanish along with it.
    let alpha = rational_grid(&mut rng, config.boundary(), FormDegree::new(3, 4, 0, 2));
    let gauge = eval_constraint(&config, &geometry, &Multiplier::Gauge(alpha)).unwrap();
    assert!(gauge.is_zero());
}

#[test]
fn hamiltonian_multiplier_is_dual_to_transverse_density_term() {
    // integral lambda e_n ^ e^{N-4} ^ (omega - omega_0) ^ p_T(d_omega e)
    // equals the torsion constraint smeared with the induced multiplier
    // p_S(lambda e_n ^ e^{N-4} ^ (omega - omega_0)), exactly in exact mode.
    let coframe = canonical_lightlike::<Q>(4).unwrap();
    let geometry = SiteGeometry::build(coframe, &RankPolicy::default()).unwrap();
    let boundary = exact_boundary(&[3, 3, 4]);
    let mut rng = rng(44);
    let omega = rational_grid(&mut rng, &boundary, FormDegree::new(3, 4, 1, 2));
    let omega_0 = rational_grid(&mut rng, &boundary, FormDegree::new(3, 4, 1, 2));
    let config = FieldConfiguration::from_constant_coframe(
        boundary,
        geometry.coframe(),
        omega,
        omega_0,
        0.0,
    )
    .unwrap();
    let lambda = GridScalar::from_fn(config.boundary(), |_| dyadic(&mut rng));

    let torsion = config.torsion().unwrap();
    assert!(!torsion.is_zero(), "need a torsionful configuration");
    let transverse = GridField::from_values(
        torsion.degree(),
        (0..torsion.site_count())
            .map(|s| geometry.project_torsion(torsion.site(s)).unwrap())
            .collect(),
    )
    .unwrap();
    let n = config.bulk_dimension();
    let direct = config
        .transversal_field()
        .wedge(&config.coframe_power(n - 4).unwrap())
        .unwrap()
        .wedge(&config.connection_shift().unwrap())
        .unwrap()
        .wedge(&transverse)
        .unwrap()
        .scale_by(lambda.values())
        .unwrap()
        .integrate(config.boundary())
        .unwrap();

    let tau_prime = hamiltonian_multiplier(&config, &geometry, &lambda).unwrap();
    assert!(!tau_prime.is_zero());
    let smeared = eval_constraint(&config, &geometry, &Multiplier::Torsion(tau_prime)).unwrap();
    assert_eq!(direct, smeared);
}

#[test]
fn torsion_multiplier_components_satisfy_null_frame_identities() {
    // In the canonical null frame the two diagonal component functions sum
    // to zero and the off-diagonal pair is antisymmetric.
    let coframe = canonical_lightlike::<Q>(4).unwrap();
    let geometry = SiteGeometry::build(coframe, &RankPolicy::default()).unwrap();
    let mut rng = rng(45);
    for _ in 0..6 {
        let mut tau = FormField::zero(FormDegree::new(3, 4, 1, 3));
        for s in geometry.multiplier_basis() {
            tau = tau.add(&s.scale(&dyadic(&mut rng))).unwrap();
        }
        let [y1, y2, x21, x12] = torsion_components_dim4(&geometry, &tau).unwrap();
        assert!((&y1 + &y2).is_zero(), "trace of diagonal components");
        assert!((&x21 + &x12).is_zero(), "off-diagonal antisymmetry");
    }
}

// ---------------------------------------------------------------------------
// Constraints and the bracket sign.

#[test]
fn gauge_closure_is_exact_and_fixes_the_bracket_sign() {
    // With a constant coframe and connection the gauge/gauge closure
    // relation is a rearrangement of finitely many rational products
    // (exact summation by parts plus pointwise fiber algebra), so it must
    // hold exactly — including the overall sign of the Poisson bracket.
    let coframe = canonical_lightlike::<Q>(4).unwrap();
    let geometry = SiteGeometry::build(coframe, &RankPolicy::default()).unwrap();
    let boundary = exact_boundary(&[4, 3, 5]);
    let mut rng = rng(51);
    let omega_site = rational_form(&mut rng, FormDegree::new(3, 4, 1, 2));
    let omega = GridField::constant(&boundary, omega_site);
    let omega_0 = GridField::zero(&boundary, FormDegree::new(3, 4, 1, 2));
    let config = FieldConfiguration::from_constant_coframe(
        boundary,
        geometry.coframe(),
        omega,
        omega_0,
        0.0,
    )
    .unwrap();

    let degree = FormDegree::new(3, 4, 0, 2);
    let alpha = rational_grid(&mut rng, config.boundary(), degree);
    let beta = rational_grid(&mut rng, config.boundary(), degree);

    let lhs = poisson_bracket(
        &config,
        &geometry,
        &Multiplier::Gauge(alpha.clone()),
        &Multiplier::Gauge(beta.clone()),
        1e-9,
    )
    .unwrap();
    let commutator = alpha.lie(&beta).unwrap();
    let closed = eval_constraint(&config, &geometry, &Multiplier::Gauge(commutator)).unwrap();
    assert!(!lhs.is_zero(), "calibration bracket degenerated to zero");
    assert_eq!(lhs, -closed, "gauge/gauge closure (sign-sensitive)");
}

#[test]
fn bracket_is_antisymmetric() {
    let (geometry, config) = null_varying_fixture(&[4, 4, 4], 52);
    let mut rng = rng(52);
    let alpha = smooth_grid(&mut rng, config.boundary(), FormDegree::new(3, 4, 0, 2));
    let lambda = smooth_scalar(&mut rng, config.boundary());
    let f = Multiplier::Gauge(alpha);
    let g = Multiplier::Lapse(lambda);
    let fg = poisson_bracket(&config, &geometry, &f, &g, 1e-8).unwrap();
    let gf = poisson_bracket(&config, &geometry, &g, &f, 1e-8).unwrap();
    assert!((fg + gf).abs() < 1e-12 * fg.abs().max(1.0));
}

#[test]
fn null_varying_fixture_is_on_shell_with_nonzero_induced_multiplier() {
    let (geometry, config) = null_varying_fixture(&[4, 4, 4], 53);
    let report = config.on_shell_report(&geometry).unwrap();
    assert!(
        report.within(1e-12),
        "torsion {:.3e}, transverse {:.3e}, hamiltonian {:.3e}",
        report.torsion_residual,
        report.transverse_residual,
        report.hamiltonian_residual
    );
    let lambda = GridScalar::constant(config.boundary(), 1.0);
    let tau_prime = hamiltonian_multiplier(&config, &geometry, &lambda).unwrap();
    assert!(tau_prime.sup_norm() > 1e-3, "induced multiplier should not vanish");
}

#[test]
fn torsion_and_hamiltonian_rows_require_the_on_shell_locus() {
    let coframe = canonical_lightlike::<f64>(4).unwrap();
    let geometry = SiteGeometry::build(coframe, &RankPolicy::default()).unwrap();
    let boundary = DiscreteBoundary::unit_torus(vec![3, 3, 3]).unwrap();
    let mut rng = rng(54);

    // Generic constant connection: torsionful.
    let omega = GridField::constant(
        &boundary,
        float_form(&mut rng, FormDegree::new(3, 4, 1, 2)),
    );
    let torsionful = FieldConfiguration::from_constant_coframe(
        boundary.clone(),
        geometry.coframe(),
        omega,
        GridField::zero(&boundary, FormDegree::new(3, 4, 1, 2)),
        0.0,
    )
    .unwrap();
    let lapse = Multiplier::Lapse(GridScalar::constant(&boundary, 1.0));
    assert!(matches!(
        hamiltonian_vector_field(&torsionful, &geometry, &lapse, 1e-10),
        Err(LatticeError::OffShell { .. })
    ));

    // Torsion-free but over a different constant coframe than the frozen
    // geometry.
    let other = sheared_lightlike::<f64>().unwrap();
    let mismatched = FieldConfiguration::from_constant_coframe(
        boundary.clone(),
        &other,
        GridField::zero(&boundary, FormDegree::new(3, 4, 1, 2)),
        GridField::zero(&boundary, FormDegree::new(3, 4, 1, 2)),
        0.0,
    )
    .unwrap();
    assert!(matches!(
        hamiltonian_vector_field(&mismatched, &geometry, &lapse, 1e-10),
        Err(LatticeError::GeometryMismatch { .. })
    ));

    // A torsion multiplier outside the frozen multiplier space fails its
    // membership validation.
    let stray = GridField::constant(
        &boundary,
        float_form(&mut rng, FormDegree::new(3, 4, 1, 3)),
    );
    assert!(matches!(
        Multiplier::Torsion(stray).validate(&geometry, &boundary, 1e-9),
        Err(LatticeError::MultiplierOffSubspace { .. })
    ));
}

#[test]
fn hamiltonian_vector_fields_match_finite_differences() {
    let (geometry, config) = null_varying_fixture(&[4, 4, 4], 55);
    let mut rng = rng(55);
    let boundary = config.boundary().clone();

    let multipliers: Vec<Multiplier<f64>> = vec![
        Multiplier::Gauge(smooth_grid(&mut rng, &boundary, FormDegree::new(3, 4, 0, 2))),
        Multiplier::Diffeo(smooth_vector(&mut rng, &boundary)),
        Multiplier::Lapse(smooth_scalar(&mut rng, &boundary)),
        Multiplier::Torsion(smooth_torsion(&mut rng, &geometry, &boundary)),
    ];

    for multiplier in &multipliers {
        let field = hamiltonian_vector_field(&config, &geometry, multiplier, 1e-9).unwrap();
        for probe in 0..5 {
            let direction = TangentDirection {
                d_e: smooth_grid(&mut rng, &boundary, FormDegree::new(3, 4, 1, 1)),
                d_omega: smooth_grid(&mut rng, &boundary, FormDegree::new(3, 4, 1, 2)),
            };
            let fd = directional_derivative(&config, &geometry, multiplier, &direction, 1e-6)
                .unwrap();
            let paired = symplectic_pairing(
                &boundary,
                &field,
                &direction.weighted(&config).unwrap(),
            )
            .unwrap();
            let scale = fd.abs().max(paired.abs()).max(1.0);
            assert!(
                (fd - paired).abs() <= 1e-5 * scale,
                "{} probe {probe}: derivative {fd:.6e} vs pairing {paired:.6e}",
                multiplier.kind()
            );
        }
    }
}

#[test]
fn closure_relations_tighten_under_refinement() {
    let run = |shape: &[usize]| {
        let (geometry, config) = flat_curved_fixture(shape, 0.3, 61);
        let mut rng = rng(62);
        let boundary = config.boundary().clone();
        let inputs = RelationInputs {
            alpha: smooth_grid(&mut rng, &boundary, FormDegree::new(3, 4, 0, 2)),
            beta: smooth_grid(&mut rng, &boundary, FormDegree::new(3, 4, 0, 2)),
            xi: smooth_vector(&mut rng, &boundary),
            eta: smooth_vector(&mut rng, &boundary),
            lambda: smooth_scalar(&mut rng, &boundary),
            lambda2: smooth_scalar(&mut rng, &boundary),
            tau: Some(smooth_torsion(&mut rng, &geometry, &boundary)),
        };
        closure_relations(&config, &geometry, &inputs, 1e-8).unwrap()
    };
    let coarse = run(&[6, 6, 6]);
    let fine = run(&[12, 12, 12]);
    assert_eq!(coarse.len(), 7, "lightlike boundary has seven closure relations");
    for (c, f) in coarse.iter().zip(&fine) {
        let (rc, rf) = (c.residual(), f.residual());
        assert!(
            rf <= 1e-9 || rc / rf > 3.0,
            "{}: residual {rc:.3e} -> {rf:.3e} does not converge",
            c.name
        );
        assert!(rc < 0.05, "{}: coarse residual {rc:.3e} unexpectedly large", c.name);
    }
}

#[test]
fn torsion_pair_density_matches_vector_field_pairing_and_closed_form() {
    let (geometry, config) = null_varying_fixture(&[8, 8, 8], 63);
    let mut rng = rng(63);
    let tau1 = smooth_torsion(&mut rng, &geometry, config.boundary());
    let tau2 = smooth_torsion(&mut rng, &geometry, config.boundary());

    let density = torsion_pair_density(&config, &geometry, &tau1, &tau2).unwrap();
    let bracket = poisson_bracket(
        &config,
        &geometry,
        &Multiplier::Torsion(tau1.clone()),
        &Multiplier::Torsion(tau2.clone()),
        1e-9,
    )
    .unwrap();
    let scale = density.abs().max(1.0);
    assert!(density.abs() > 1e-4, "torsion pairing degenerated to zero");
    assert!(
        (density - bracket).abs() <= 1e-10 * scale,
        "density {density:.6e} vs stored-field bracket {bracket:.6e}"
    );

    let closed = torsion_pair_closed_form_dim4(&config, &geometry, &tau1, &tau2).unwrap();
    assert!(
        (density - closed).abs() <= 1e-8 * scale,
        "density {density:.6e} vs component quadrature {closed:.6e}"
    );
}

#[test]
fn hamiltonian_pair_reduces_to_induced_torsion_pair() {
    let (geometry, config) = null_varying_fixture(&[8, 8, 8], 64);
    let mut rng = rng(64);
    let lambda = smooth_scalar(&mut rng, config.boundary());
    let mu = smooth_scalar(&mut rng, config.boundary());
    let (lhs, rhs) = hamiltonian_pair_reduction(&config, &geometry, &lambda, &mu, 1e-9).unwrap();
    let scale = lhs.abs().max(rhs.abs()).max(1e-6);
    assert!(lhs.abs() > 1e-6, "Hamiltonian pair degenerated to zero");
    assert!(
        (lhs - rhs).abs() <= 1e-3 * scale,
        "lapse/lapse bracket {lhs:.6e} vs induced torsion pair {rhs:.6e}"
    );
}

#[test]
fn lapse_torsion_bracket_carries_curvature_coupling() {
    let (geometry, config) = flat_curved_fixture(&[8, 8, 8], 0.0, 65);
    let mut rng = rng(65);
    let lambda = smooth_scalar(&mut rng, config.boundary());
    let tau = smooth_torsion(&mut rng, &geometry, config.boundary());

    let direct = poisson_bracket(
        &config,
        &geometry,
        &Multiplier::Torsion(tau.clone()),
        &Multiplier::Lapse(lambda.clone()),
        1e-8,
    )
    .unwrap();
    let tau_prime = hamiltonian_multiplier(&config, &geometry, &lambda).unwrap();
    let torsion_part = poisson_bracket(
        &config,
        &geometry,
        &Multiplier::Torsion(tau.clone()),
        &Multiplier::Torsion(tau_prime),
        1e-8,
    )
    .unwrap();
    let coupling = curvature_coupling_dim4(&config, &geometry, &lambda, &tau).unwrap();
    assert!(coupling.abs() > 1e-6, "curvature coupling degenerated to zero");
    let scale = direct.abs().max(1.0);
    assert!(
        (direct - torsion_part - coupling).abs() <= 1e-3 * scale,
        "bracket {direct:.6e} vs torsion part {torsion_part:.6e} + coupling {coupling:.6e}"
    );
}

#[test]
fn class_split_counts_first_and_second_class_constraints() {
    let (geometry, config) = null_varying_fixture(&[8, 8, 8], 66);
    let profile = GridScalar::from_fn(config.boundary(), |s| {
        1.0 + 0.5 * wave(config.boundary(), s, &[0, 0, 1], 0.7)
    });
    let basis = MultiplierBasis::standard(&config, &geometry, &profile).unwrap();
    assert_eq!(basis.len(), 12);
    assert_eq!(basis.torsion_start, 10);

    // Discretization noise sets the rank floor here, not machine epsilon.
    let policy = RankPolicy {
        rel_tol: 1e-2,
        min_gap: 5.0,
        fixed_rank: None,
    };
    let report = classify(&config, &geometry, &basis, &policy, 1e-9).unwrap();
    assert_eq!(report.first_class, 10);
    assert_eq!(report.second_class, 2);
    assert_eq!(report.dof, 2);
    assert!(
        report.cancellation_residual < 1e-3,
        "mixed-block cancellation {:.3e}",
        report.cancellation_residual
    );
    for i in 0..12 {
        for j in 0..12 {
            assert!((report.gram[i][j] + report.gram[j][i]).abs() < 1e-14);
        }
    }

    // A constant torsion profile makes the torsion block singular.
    let flat_profile = GridScalar::constant(config.boundary(), 1.0);
    let degenerate = MultiplierBasis::standard(&config, &geometry, &flat_profile).unwrap();
    assert!(matches!(
        classify(&config, &geometry, &degenerate, &policy, 1e-9),
        Err(LatticeError::DegenerateTorsionBlock)
    ));
}
