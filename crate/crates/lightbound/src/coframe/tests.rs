use num::rational::BigRational;
use num::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::forms::{eta_sign, FormDegree, FormField};
use crate::linalg::RankPolicy;

use super::fixture::{parse_fixture, write_fixture};
use super::sample::{
    canonical_lightlike, canonical_lightlike_orthonormal, identity_coframe, sample_lightlike,
    sample_nondegenerate, sheared_lightlike,
};
use super::spaces::BoundarySpaces;
use super::tau::{
    frame_trace, kernel_equation_residuals, multiplier_equation_residuals,
    multiplier_equation_residuals_dim4, sigma_pattern_residuals, wedge_pairing_rank,
    WedgeBracketInverter,
};
use super::*;

fn exact_vec(values: &[i64]) -> Vec<BigRational> {
    values.iter().map(|&v| BigRational::from_integer(v.into())).collect()
}

fn assert_all_zero(residuals: &[BigRational], what: &str) {
    assert!(
        residuals.iter().all(|r| r.is_zero()),
        "{what}: nonzero residuals {residuals:?}"
    );
}

#[test]
fn canonical_lightlike_geometry_is_exact() {
    let coframe = canonical_lightlike::<BigRational>(4).unwrap();
    assert_eq!(coframe.signature_class(), SignatureClass::Lightlike);
    let g = coframe.boundary_metric();
    for mu in 0..3 {
        for nu in 0..3 {
            let expected = if mu == nu && mu < 2 { 1 } else { 0 };
            assert_eq!(g[mu][nu], BigRational::from_integer(expected.into()));
        }
    }
    let light = coframe.lightlike().unwrap();
    assert_eq!(light.null_direction, exact_vec(&[0, 0, 1]));
    assert_eq!(light.null_covector, exact_vec(&[0, 0, 1]));
    assert_eq!(light.completion_axes, vec![0, 1]);
    assert_eq!(light.covector_residual, 0.0);
    // e_tilde = e_1 dx^1 + e_2 dx^2; e_hat = e_3 dx^3.
    for a in 0..4u8 {
        for mu in 0..3u8 {
            let tilde = light.reduced_coframe.coeff(&[mu], &[a]).unwrap();
            let expected = u64::from(mu == a as u8 && mu < 2);
            assert_eq!(tilde, BigRational::from_integer(expected.into()));
            let hat = light.null_part.coeff(&[mu], &[a]).unwrap();
            let expected_hat = u64::from(mu == 2 && (a == 2 || a == 3));
            assert_eq!(hat, BigRational::from_integer(expected_hat.into()));
        }
    }
    assert_eq!(light.reduced_metric, coframe.boundary_metric());
}

#[test]
fn canonical_frame_gram_has_unit_null_pairing() {
    // In its own frame basis the canonical coframe's fiber metric is a
    // Euclidean block plus the hyperbolic pairing of the null row with the
    // transversal.
    for n in [4usize, 5, 6] {
        let coframe = canonical_lightlike::<BigRational>(n).unwrap();
        let frame = coframe.frame_rows();
        for i in 0..n {
            for j in 0..n {
                let mut pairing = BigRational::zero();
                for a in 0..n {
                    let term = &frame[i][a] * &frame[j][a];
                    if eta_sign(a as u8, n) < 0 {
                        pairing -= term;
                    } else {
                        pairing += term;
                    }
                }
                let expected = if i < n - 2 && i == j {
                    1
                } else if (i, j) == (n - 2, n - 1) || (i, j) == (n - 1, n - 2) {
                    1
                } else {
                    0
                };
                assert_eq!(pairing, BigRational::from_integer(expected.into()), "({i},{j})");
            }
        }
    }
}

#[test]
fn canonical_orthonormal_matches_float_reference() {
    let coframe = canonical_lightlike_orthonormal::<f64>(4).unwrap();
    assert_eq!(coframe.signature_class(), SignatureClass::Lightlike);
    let g = coframe.boundary_metric();
    for mu in 0..3 {
        for nu in 0..3 {
            let expected = f64::from(u8::from(mu == nu && mu < 2));
            assert!((g[mu][nu] - expected).abs() < 1e-15, "g[{mu}][{nu}] = {}", g[mu][nu]);
        }
    }
    let light = coframe.lightlike().unwrap();
    for (i, x) in light.null_direction.iter().enumerate() {
        let expected = f64::from(u8::from(i == 2));
        assert!((x - expected).abs() < 1e-12);
    }
    for (i, b) in light.null_covector.iter().enumerate() {
        let expected = f64::from(u8::from(i == 2));
        assert!((b - expected).abs() < 1e-9, "beta[{i}] = {b}");
    }
    assert!(light.covector_residual < 1e-9);
}

#[test]
fn identity_coframe_is_euclidean() {
    let coframe = identity_coframe::<BigRational>(4).unwrap();
    assert_eq!(
        coframe.signature_class(),
        SignatureClass::Nondegenerate {
            positive: 3,
            negative: 0
        }
    );
    // The split is trivial: reduced coframe is the coframe itself.
    assert_eq!(
        coframe.reduced_coframe().coeffs(),
        coframe.coframe().coeffs()
    );
}

#[test]
fn timelike_boundary_classifies_with_negative_count() {
    // Boundary containing the timelike fiber direction: signature (2,1).
    let rows = vec![
        exact_vec(&[1, 0, 0, 0]),
        exact_vec(&[0, 1, 0, 0]),
        exact_vec(&[0, 0, 0, 1]),
    ];
    let e = FormField::coframe_from_rows(3, 4, &rows).unwrap();
    let e_n = FormField::from_coeffs(
        FormDegree::new(3, 4, 0, 1),
        exact_vec(&[0, 0, 1, 0]),
    )
    .unwrap();
    let coframe = BoundaryCoframe::new(e, e_n).unwrap();
    assert_eq!(
        coframe.signature_class(),
        SignatureClass::Nondegenerate {
            positive: 2,
            negative: 1
        }
    );
}

#[test]
fn exact_inertia_handles_hyperbolic_and_degenerate_blocks() {
    let make = |rows: &[&[i64]]| -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| exact_vec(r)).collect()
    };
    // Pure hyperbolic pair: signature (1,1).
    assert_eq!(exact_inertia(make(&[&[0, 1], &[1, 0]])), (1, 1, 0));
    // Degenerate diagonal.
    assert_eq!(exact_inertia(make(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, -2]])), (1, 1, 1));
    // Zero matrix.
    assert_eq!(exact_inertia(make(&[&[0, 0], &[0, 0]])), (0, 0, 2));
    // Hyperbolic block plus kernel.
    assert_eq!(
        exact_inertia(make(&[&[0, 2, 0], &[2, 0, 0], &[0, 0, 0]])),
        (1, 1, 1)
    );
}

#[test]
fn reduced_coframe_annihilates_null_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [4usize, 5] {
        for _ in 0..3 {
            let coframe = sample_lightlike::<BigRational>(n, &mut rng).unwrap();
            let light = coframe.lightlike().unwrap();
            let contracted = light
                .reduced_coframe
                .contract(&light.null_direction)
                .unwrap();
            assert!(contracted.coeffs().iter().all(|c| c.is_zero()));
            assert_eq!(light.covector_residual, 0.0);
            // The reduced metric coincides with the boundary metric: the
            // null contractions in the correction terms vanish.
            assert_eq!(light.reduced_metric, coframe.boundary_metric());
        }
    }
}

#[test]
fn subspace_dimensions_follow_signature_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let policy = RankPolicy::default();
    for n in [4usize, 5] {
        let kernel_dim = BoundarySpaces::expected_kernel_dim(n);
        let degenerate_dim = BoundarySpaces::expected_degenerate_dim(n);
        for _ in 0..2 {
            let light = sample_lightlike::<BigRational>(n, &mut rng).unwrap();
            let spaces = BoundarySpaces::build(&light, &policy).unwrap();
            assert_eq!(spaces.kernel_12.dim(), kernel_dim, "lightlike N={n}");
            assert_eq!(spaces.kernel_21.dim(), kernel_dim);
            assert_eq!(spaces.torsion_space.dim(), degenerate_dim);
            assert_eq!(spaces.gauge_space.dim(), degenerate_dim);
            assert_eq!(spaces.multiplier_space.dim(), degenerate_dim);
            assert_eq!(spaces.bracket_image.dim(), kernel_dim - degenerate_dim);

            let nondeg = sample_nondegenerate::<BigRational>(n, &mut rng).unwrap();
            let spaces = BoundarySpaces::build(&nondeg, &policy).unwrap();
            assert_eq!(spaces.kernel_12.dim(), kernel_dim, "nondegenerate N={n}");
            assert_eq!(spaces.kernel_21.dim(), kernel_dim);
            assert_eq!(spaces.torsion_space.dim(), 0);
            assert_eq!(spaces.gauge_space.dim(), 0);
            assert_eq!(spaces.multiplier_space.dim(), 0);
            assert_eq!(spaces.bracket_image.dim(), kernel_dim);
        }
    }
}

#[test]
fn kernel_equations_characterise_the_wedge_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [4usize, 5] {
        let coframes = [
            sample_lightlike::<BigRational>(n, &mut rng).unwrap(),
            sample_nondegenerate::<BigRational>(n, &mut rng).unwrap(),
        ];
        for coframe in &coframes {
            let spaces = BoundarySpaces::build(coframe, &RankPolicy::default()).unwrap();
            let degree = FormDegree::new(n - 1, n, 1, 2);
            for v in subspace_fields::<BigRational>(&spaces.kernel_12, degree).unwrap() {
                let residuals = kernel_equation_residuals(coframe, &v).unwrap();
                assert_eq!(residuals.len(), (n - 1) * n);
                assert_all_zero(&residuals, "kernel equations");
            }
            // A generic field violates them: the equations are not vacuous.
            let generic = FormField::basis(degree, 0);
            let residuals = kernel_equation_residuals(coframe, &generic).unwrap();
            assert!(residuals.iter().any(|r| !r.is_zero()));
        }
    }
}

#[test]
fn multiplier_equations_hold_on_computed_space() {
    for n in [4usize, 5] {
        let coframe = canonical_lightlike::<BigRational>(n).unwrap();
        let spaces = BoundarySpaces::build(&coframe, &RankPolicy::default()).unwrap();
        let degree = FormDegree::new(n - 1, n, n - 3, n - 1);
        let basis = subspace_fields::<BigRational>(&spaces.multiplier_space, degree).unwrap();
        assert_eq!(basis.len(), n * (n - 3) / 2);
        for t in &basis {
            let residuals = multiplier_equation_residuals(&coframe, t).unwrap();
            assert_all_zero(&residuals, "multiplier equations");
        }
        let generic = FormField::basis(degree, 1);
        let residuals = multiplier_equation_residuals(&coframe, &generic).unwrap();
        assert!(residuals.iter().any(|r| !r.is_zero()));
    }
}

#[test]
fn dim4_multiplier_components_match_closed_form() {
    // Diagonal metric: tau_2^{134} = tau_1^{234} and tau_1^{134} = -tau_2^{234}.
    let canonical = canonical_lightlike::<BigRational>(4).unwrap();
    // Off-diagonal metric: the metric-weighted relation takes over.
    let sheared = sheared_lightlike::<BigRational>().unwrap();
    for coframe in [&canonical, &sheared] {
        let spaces = BoundarySpaces::build(coframe, &RankPolicy::default()).unwrap();
        let degree = FormDegree::new(3, 4, 1, 3);
        for t in subspace_fields::<BigRational>(&spaces.multiplier_space, degree).unwrap() {
            let residuals = multiplier_equation_residuals_dim4(coframe, &t).unwrap();
            assert_all_zero(&residuals, "dim-4 multiplier equations");
        }
        // Zero input: exactly zero residuals.
        let zero = FormField::zero(degree);
        let residuals = multiplier_equation_residuals_dim4(coframe, &zero).unwrap();
        assert_all_zero(&residuals, "zero input");
    }
}

#[test]
fn dim4_multiplier_components_match_in_float_mode() {
    let coframe = sheared_lightlike::<f64>().unwrap();
    let g = coframe.boundary_metric();
    assert!((g[0][1] - 0.3).abs() < 1e-15);
    let spaces = BoundarySpaces::build(&coframe, &RankPolicy::default()).unwrap();
    let degree = FormDegree::new(3, 4, 1, 3);
    let basis = subspace_fields::<f64>(&spaces.multiplier_space, degree).unwrap();
    assert_eq!(basis.len(), 2);
    for t in &basis {
        let residuals = multiplier_equation_residuals_dim4(&coframe, t).unwrap();
        for r in residuals {
            assert!(r.abs() < 1e-9, "float residual {r}");
        }
    }
}

#[test]
fn dim4_equations_reject_bad_inputs() {
    let five = canonical_lightlike::<BigRational>(5).unwrap();
    let field = FormField::zero(FormDegree::new(4, 5, 2, 4));
    assert!(matches!(
        multiplier_equation_residuals_dim4(&five, &field),
        Err(CoframeError::DimensionNotFour { got: 5 })
    ));

    // Null direction along the first axis: g_11 = 0, not adapted.
    let rows = vec![
        exact_vec(&[0, 0, 1, 1]),
        exact_vec(&[0, 1, 0, 0]),
        exact_vec(&[1, 0, 0, 0]),
    ];
    let e = FormField::coframe_from_rows(3, 4, &rows).unwrap();
    let e_n = FormField::from_coeffs(
        FormDegree::new(3, 4, 0, 1),
        vec![
            BigRational::zero(),
            BigRational::zero(),
            BigRational::new(1.into(), 2.into()),
            BigRational::new((-1).into(), 2.into()),
        ],
    )
    .unwrap();
    let swapped = BoundaryCoframe::new(e, e_n).unwrap();
    assert!(swapped.is_lightlike());
    let field = FormField::zero(FormDegree::new(3, 4, 1, 3));
    assert!(matches!(
        multiplier_equation_residuals_dim4(&swapped, &field),
        Err(CoframeError::NotAdapted { .. })
    ));
}

#[test]
fn sigma_solve_satisfies_trace_and_pattern() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for n in [4usize, 5] {
        let coframe = canonical_lightlike::<BigRational>(n).unwrap();
        let spaces = BoundarySpaces::build(&coframe, &RankPolicy::default()).unwrap();
        let degree = FormDegree::new(n - 1, n, n - 3, n - 1);
        let inverter = WedgeBracketInverter::new(&coframe).unwrap();
        for t in subspace_fields::<BigRational>(&spaces.multiplier_space, degree).unwrap() {
            let sigma = inverter.apply(&t).unwrap();
            assert!(frame_trace(&coframe, &sigma).unwrap().is_zero());
            let pattern = sigma_pattern_residuals(&coframe, &sigma).unwrap();
            assert_all_zero(&pattern, "sigma pattern");
        }
    }
    // The trace statement is coordinate-free: it survives arbitrary
    // transported (non-adapted) lightlike coframes.
    for _ in 0..3 {
        let coframe = sample_lightlike::<BigRational>(4, &mut rng).unwrap();
        let spaces = BoundarySpaces::build(&coframe, &RankPolicy::default()).unwrap();
        let degree = FormDegree::new(3, 4, 1, 3);
        let inverter = WedgeBracketInverter::new(&coframe).unwrap();
        for t in subspace_fields::<BigRational>(&spaces.multiplier_space, degree).unwrap() {
            let sigma = inverter.apply(&t).unwrap();
            assert!(frame_trace(&coframe, &sigma).unwrap().is_zero());
        }
    }
}

#[test]
fn sigma_solve_in_float_mode_stays_small() {
    let coframe = canonical_lightlike_orthonormal::<f64>(4).unwrap();
    let spaces = BoundarySpaces::build(&coframe, &RankPolicy::default()).unwrap();
    let degree = FormDegree::new(3, 4, 1, 3);
    let inverter = WedgeBracketInverter::new(&coframe).unwrap();
    for t in subspace_fields::<f64>(&spaces.multiplier_space, degree).unwrap() {
        let sigma = inverter.apply(&t).unwrap();
        assert!(frame_trace(&coframe, &sigma).unwrap().abs() < 1e-10);
        for r in sigma_pattern_residuals(&coframe, &sigma).unwrap() {
            assert!(r.abs() < 1e-10, "pattern residual {r}");
        }
    }
}

#[test]
fn torsion_multiplier_pairing_has_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let canonical = canonical_lightlike::<BigRational>(4).unwrap();
    let random5 = sample_lightlike::<BigRational>(5, &mut rng).unwrap();
    for (n, coframe) in [(4usize, &canonical), (5, &random5)] {
        let spaces = BoundarySpaces::build(coframe, &RankPolicy::default()).unwrap();
        let torsion = subspace_fields::<BigRational>(
            &spaces.torsion_space,
            FormDegree::new(n - 1, n, 2, 1),
        )
        .unwrap();
        let multiplier = subspace_fields::<BigRational>(
            &spaces.multiplier_space,
            FormDegree::new(n - 1, n, n - 3, n - 1),
        )
        .unwrap();
        let expected = n * (n - 3) / 2;
        assert_eq!(torsion.len(), expected);
        assert_eq!(multiplier.len(), expected);
        assert_eq!(wedge_pairing_rank(&torsion, &multiplier).unwrap(), expected);
    }
}

#[test]
fn construction_rejects_degenerate_input() {
    // Repeated rows: rank deficient.
    let rows = vec![
        exact_vec(&[1, 0, 0, 0]),
        exact_vec(&[1, 0, 0, 0]),
        exact_vec(&[0, 1, 0, 0]),
    ];
    let e = FormField::coframe_from_rows(3, 4, &rows).unwrap();
    let e_n = FormField::from_coeffs(
        FormDegree::new(3, 4, 0, 1),
        exact_vec(&[0, 0, 0, 1]),
    )
    .unwrap();
    assert!(matches!(
        BoundaryCoframe::new(e, e_n),
        Err(CoframeError::RankDeficient { rank: 2, expected: 3 })
    ));

    // Transversal inside the coframe span: not a frame.
    let rows = vec![
        exact_vec(&[1, 0, 0, 0]),
        exact_vec(&[0, 1, 0, 0]),
        exact_vec(&[0, 0, 1, 0]),
    ];
    let e = FormField::coframe_from_rows(3, 4, &rows).unwrap();
    let e_n = FormField::from_coeffs(
        FormDegree::new(3, 4, 0, 1),
        exact_vec(&[1, 1, 0, 0]),
    )
    .unwrap();
    assert!(matches!(
        BoundaryCoframe::new(e, e_n),
        Err(CoframeError::NotAFrame)
    ));

    // Wrong degrees.
    let bad = FormField::<BigRational>::zero(FormDegree::new(3, 4, 2, 1));
    let e_n = FormField::from_coeffs(
        FormDegree::new(3, 4, 0, 1),
        exact_vec(&[0, 0, 0, 1]),
    )
    .unwrap();
    assert!(matches!(
        BoundaryCoframe::new(bad, e_n),
        Err(CoframeError::BadCoframeDegree(_))
    ));
}

#[test]
fn operator_builders_validate_degrees() {
    let coframe = canonical_lightlike::<BigRational>(4).unwrap();
    assert!(matches!(
        coframe.wedge_operator(3, 1, 2),
        Err(CoframeError::DegreeOverflow { .. })
    ));
    assert!(matches!(
        coframe.bracket_operator(1, 0),
        Err(CoframeError::NoFiberIndex)
    ));
    // W_0 is the identity.
    let w0 = coframe.wedge_operator(0, 1, 2).unwrap();
    let dim = FormDegree::new(3, 4, 1, 2).components();
    let policy = RankPolicy::default();
    assert_eq!(w0.rank(&policy).unwrap(), dim);
    assert_eq!(w0.kernel(&policy).unwrap().dim(), 0);
}

#[test]
fn express_in_frame_gives_identity_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for n in [4usize, 5] {
        let coframe = sample_lightlike::<BigRational>(n, &mut rng).unwrap();
        let hat = coframe.express_in_frame(coframe.coframe()).unwrap();
        for mu in 0..(n - 1) as u8 {
            for a in 0..n as u8 {
                let expected = u64::from(mu == a);
                assert_eq!(
                    hat.coeff(&[mu], &[a]).unwrap(),
                    BigRational::from_integer(expected.into())
                );
            }
        }
    }
}

#[test]
fn samplers_produce_declared_classes() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in [4usize, 5, 6] {
        for _ in 0..3 {
            let light = sample_lightlike::<BigRational>(n, &mut rng).unwrap();
            assert_eq!(light.signature_class(), SignatureClass::Lightlike);
            let nondeg = sample_nondegenerate::<BigRational>(n, &mut rng).unwrap();
            assert!(matches!(
                nondeg.signature_class(),
                SignatureClass::Nondegenerate { .. }
            ));
        }
    }
    // Float sampling stays classifiable too.
    let light = sample_lightlike::<f64>(4, &mut rng).unwrap();
    assert_eq!(light.signature_class(), SignatureClass::Lightlike);
}

#[test]
fn fixture_round_trips_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cases = [
        canonical_lightlike::<BigRational>(4).unwrap(),
        sheared_lightlike::<BigRational>().unwrap(),
        sample_nondegenerate::<BigRational>(5, &mut rng).unwrap(),
    ];
    for coframe in &cases {
        let text = write_fixture(coframe);
        let parsed = parse_fixture::<BigRational>(&text).unwrap();
        assert_eq!(parsed.frame_rows(), coframe.frame_rows());
        assert_eq!(parsed.signature_class(), coframe.signature_class());
    }
    // Float fixtures round-trip through shortest-decimal formatting.
    let float_coframe = canonical_lightlike_orthonormal::<f64>(4).unwrap();
    let text = write_fixture(&float_coframe);
    let parsed = parse_fixture::<f64>(&text).unwrap();
    assert_eq!(parsed.frame_rows(), float_coframe.frame_rows());
}

#[test]
fn fixture_parser_reports_errors() {
    let valid = write_fixture(&canonical_lightlike::<BigRational>(4).unwrap());

    let wrong_class = valid.replace("signature lightlike", "signature nondegenerate");
    assert!(matches!(
        parse_fixture::<BigRational>(&wrong_class),
        Err(CoframeError::FixtureSignatureMismatch { .. })
    ));

    let missing_dim = valid.replace("dim 4", "");
    assert!(matches!(
        parse_fixture::<BigRational>(&missing_dim),
        Err(CoframeError::Fixture { .. })
    ));

    let bad_value = "dim 4\n1 0 0 x\n0 1 0 0\n0 0 1 1\n0 0 1 -1\n";
    assert!(matches!(
        parse_fixture::<BigRational>(bad_value),
        Err(CoframeError::Fixture { .. })
    ));

    let zero_denominator = "dim 4\n1/0 0 0 0\n0 1 0 0\n0 0 1 1\n0 0 1 -1\n";
    assert!(matches!(
        parse_fixture::<BigRational>(zero_denominator),
        Err(CoframeError::Fixture { .. })
    ));

    // Decimals and fractions parse exactly.
    let text = "dim 4\nsignature lightlike\n1 0.6 0 0\n0 0.8 0 0\n0 0 1 0.5\n0 0 1 -0.5\n";
    let parsed = parse_fixture::<BigRational>(text).unwrap();
    assert_eq!(
        parsed.frame_rows()[1][1],
        BigRational::new(4.into(), 5.into())
    );
    assert_eq!(parsed.signature_class(), SignatureClass::Lightlike);
}
