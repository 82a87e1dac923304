use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;

use extcert::averaging::{average_2d, euler_rotation, rotate_field, rotation_2d};
use extcert::calculus::{
    dirichlet_norm_sq, divergence, flux, lhs_13, lhs_17, quadratic_form, quadratic_form_strain,
    reduced_integral_2d, reduced_integral_3d, QuadratureSpec,
};
use extcert::certifier::{
    best_mode, certify_inflow_3d, certify_outflow_2d, certify_outflow_3d, identity_report,
    CertifyOptions, IdentityOptions, CHECK_NAMES,
};
use extcert::fields::{
    averaged_extension_2d, averaged_extension_3d, inflow_field_2d, inflow_field_3d,
    synthetic_field_2d, test_field_2d, test_field_3d, StreamMode, StreamPerturbation,
};
use extcert::special::{minimal_m, SpecialIntegrals};
use extcert::{
    AnnulusGeometry, EulerConvention, RotationSpec2D, ScalarProfile, ShellGeometry, Verdict,
};

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

/// Simpson's rule, used as an oracle independent of the library quadrature.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn f_values_from_two_by_two_solve_at_rho_two() {
    let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
    let l1 = reduced_integral_2d(&test_field_2d(&g, 1).unwrap(), &q());
    let l2 = reduced_integral_2d(&test_field_2d(&g, 2).unwrap(), &q());
    // l1 = F1 − F2, l2 = 4F1 − F2.
    let f1 = (l2 - l1) / 3.0;
    let f2 = f1 - l1;
    let s = SpecialIntegrals::new(2.0).unwrap();
    assert!((f1 - s.f1).abs() < 1e-8 && (f2 - s.f2).abs() < 1e-8);
}

#[test]
fn g_values_from_two_by_two_solve_and_third_mode_residual() {
    let g = ShellGeometry::new(1.0, 2.0).unwrap();
    let l = |m| reduced_integral_3d(&test_field_3d(&g, m).unwrap(), &q());
    let (l1, l2, l3) = (l(1), l(2), l(3));
    let g1 = (l2 - l1) / 3.0;
    let g2 = g1 - l1;
    assert!((9.0 * g1 - g2 - l3).abs() <= 1e-8);
    let s = SpecialIntegrals::new(2.0).unwrap();
    assert!((g1 - s.g1).abs() < 1e-8 && (g2 - s.g2).abs() < 1e-8);
}

#[test]
fn reduced_integrals_depend_only_on_aspect_ratio() {
    for rho in [1.5, 3.0] {
        for m in [1, 4] {
            let a = reduced_integral_2d(
                &test_field_2d(&AnnulusGeometry::new(1.0, rho).unwrap(), m).unwrap(),
                &q(),
            );
            let b = reduced_integral_2d(
                &test_field_2d(&AnnulusGeometry::new(5.0, 5.0 * rho).unwrap(), m).unwrap(),
                &q(),
            );
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            let c = reduced_integral_3d(
                &test_field_3d(&ShellGeometry::new(1.0, rho).unwrap(), m).unwrap(),
                &q(),
            );
            let d = reduced_integral_3d(
                &test_field_3d(&ShellGeometry::new(5.0, 5.0 * rho).unwrap(), m).unwrap(),
                &q(),
            );
            assert!((c - 25.0 * d).abs() <= 1e-12 * (1.0 + c.abs()));
        }
    }
}

#[test]
fn inflow_reductions_match_one_dimensional_integrals() {
    let (r1, r2) = (1.0, 2.5);
    let f = ScalarProfile::normalized_bump(r1, r2);
    let radial = simpson(r1, r2, 2000, |r| f.value(r).powi(2) / r);
    let phi = -0.7;
    let g2 = AnnulusGeometry::new(r1, r2).unwrap();
    let lhs2 = lhs_13(
        phi,
        &ScalarProfile::zero(),
        &inflow_field_2d(&g2, &f).unwrap(),
        &q(),
    )
    .unwrap();
    assert!((lhs2 + phi * radial).abs() < 1e-10);
    let g3 = ShellGeometry::new(r1, r2).unwrap();
    let lhs3 = lhs_17(phi, &inflow_field_3d(&g3, &f).unwrap(), &q()).unwrap();
    assert!((lhs3 + 2.0 * phi / 3.0 * radial).abs() < 1e-10);
}

#[test]
fn lhs_matches_kappa_for_random_swirls() {
    let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
    let s = SpecialIntegrals::new(2.0).unwrap();
    let m = s.minimal_m();
    let u = test_field_2d(&g, m).unwrap();
    let expected = s.kappa(m) / (2.0 * PI);
    for v in ["poly:0.3,-1.2,0.7", "poly:5,0,0,-0.2,0.01", "poly:-1,4"] {
        let v = ScalarProfile::parse(v).unwrap();
        let lhs = lhs_13(1.0, &v, &u, &q()).unwrap();
        assert!((lhs - expected).abs() / expected <= 1e-8);
        // Full Cartesian quadratic form agrees with the reduced form.
        let full = quadratic_form(&averaged_extension_2d(&g, 1.0, &v), &u, &q()).unwrap();
        assert!((full - lhs).abs() <= 1e-10 * lhs.abs());
    }
}

#[test]
fn shell_lhs_matches_kappa3() {
    let g = ShellGeometry::new(1.0, 2.0).unwrap();
    let s = SpecialIntegrals::new(2.0).unwrap();
    let m = s.minimal_m3();
    let lhs = lhs_17(1.0, &test_field_3d(&g, m).unwrap(), &q()).unwrap();
    assert!((lhs - s.kappa3(m) / (4.0 * PI)).abs() <= 1e-6);
}

#[test]
fn strain_and_full_gradient_forms_agree() {
    let g = AnnulusGeometry::new(1.0, 3.0).unwrap();
    let v = synthetic_field_2d(&g, 2.0, &StreamPerturbation::sample_non_symmetric());
    let u = test_field_2d(&g, 3).unwrap();
    let a = quadratic_form(&v, &u, &q()).unwrap();
    let b = quadratic_form_strain(&v, &u, &q()).unwrap();
    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
}

#[test]
fn outflow_certificates_are_scale_invariant_in_the_plane() {
    let opts = CertifyOptions::default();
    let base = certify_outflow_2d(
        &AnnulusGeometry::new(1.0, 2.5).unwrap(),
        1.0,
        None,
        None,
        &opts,
    )
    .unwrap();
    for lambda in [0.1, 7.0] {
        let g = AnnulusGeometry::new(lambda, 2.5 * lambda).unwrap();
        let c = certify_outflow_2d(&g, 1.0, None, None, &opts).unwrap();
        assert_eq!(c.mode_or_profile, base.mode_or_profile);
        for (a, b) in [
            (c.kappa, base.kappa),
            (c.lhs, base.lhs),
            (c.grad_norm_sq, base.grad_norm_sq),
        ] {
            assert!((a - b).abs() <= 1e-10 * b.abs());
        }
        assert!((c.epsilon_star - base.epsilon_star).abs() <= 1e-10 * base.epsilon_star);
    }
}

#[test]
fn epsilon_star_is_linear_in_flux() {
    let opts = CertifyOptions::default();
    let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
    let a = certify_outflow_2d(&g, 1.0, None, None, &opts).unwrap();
    let b = certify_outflow_2d(&g, 10.0, None, None, &opts).unwrap();
    assert!((b.epsilon_star - 10.0 * a.epsilon_star).abs() <= 1e-12 * b.epsilon_star);
    let s = ShellGeometry::new(1.0, 2.0).unwrap();
    let c = certify_outflow_3d(&s, 1.0, None, &opts).unwrap();
    let d = certify_outflow_3d(&s, 2.0, None, &opts).unwrap();
    assert!((d.epsilon_star - 2.0 * c.epsilon_star).abs() <= 1e-12 * d.epsilon_star);
}

#[test]
fn shell_inflow_patterns() {
    let opts = CertifyOptions::default();
    let g = ShellGeometry::new(1.0, 2.0).unwrap();
    let f = ScalarProfile::parse("poly:-2,3,-1").unwrap();
    let one = certify_inflow_3d(&g, -1.0, Some(&f), &opts).unwrap();
    assert_eq!(one.verdict, Verdict::Violated);
    let two = certify_inflow_3d(&g, -2.0, Some(&f), &opts).unwrap();
    assert!((two.epsilon_star - 2.0 * one.epsilon_star).abs() <= 1e-12 * two.epsilon_star);
    let flipped = certify_inflow_3d(&g, 1.0, Some(&f), &opts).unwrap();
    assert!(flipped.lhs < 0.0);
    assert_eq!(flipped.verdict, Verdict::Inconclusive);
}

#[test]
fn best_mode_dominates_and_large_modes_decay() {
    let opts = CertifyOptions::default();
    let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
    let modes: Vec<u32> = (1..=20).collect();
    let (m, best) = best_mode(&g, 1.0, &modes, None, &opts).unwrap();
    let at_min = certify_outflow_2d(&g, 1.0, None, None, &opts).unwrap();
    assert!(best.epsilon_star >= at_min.epsilon_star);
    assert_eq!(best.verdict, Verdict::Violated);
    assert!(modes.contains(&m));
    let m_big = 4 * minimal_m(2.0).unwrap();
    let e = |m| {
        certify_outflow_2d(&g, 1.0, None, Some(m), &opts)
            .unwrap()
            .epsilon_star
    };
    assert!(e(2 * m_big) < e(m_big));
}

#[test]
fn identity_report_is_complete_and_deterministic() {
    let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
    let opts = IdentityOptions::default();
    let a = identity_report(&g, &[1, 3, 5], &opts).unwrap();
    let b = identity_report(&g, &[1, 3, 5], &opts).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.all_passed(), "{}", a.to_json());
    for name in CHECK_NAMES {
        assert_eq!(a.checks.iter().filter(|c| c.name == name).count(), 1);
    }
    assert_eq!(a.checks.len(), CHECK_NAMES.len());
    assert!(identity_report(&g, &[], &opts).is_err());
}

#[test]
fn identity_report_thin_annulus() {
    let g = AnnulusGeometry::new(1.0, 1.01).unwrap();
    let opts = IdentityOptions {
        quadrature: QuadratureSpec::new(96, 128, 64).unwrap(),
        ..Default::default()
    };
    let r = identity_report(&g, &[1, 3, 5], &opts).unwrap();
    assert!(r.all_passed(), "{}", r.to_json());
}

fn poly(c: &[f64]) -> ScalarProfile {
    ScalarProfile::polynomial(c.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn divergence_is_rotation_equivariant(
        angle in 0.0f64..(2.0 * PI),
        a1 in 0.0f64..(2.0 * PI), a2 in 0.0f64..(2.0 * PI), a3 in 0.0f64..PI,
        r in 1.1f64..1.9, t in 0.0f64..(2.0 * PI), c in -0.95f64..0.95,
    ) {
        let g2 = AnnulusGeometry::new(1.0, 2.0).unwrap();
        let v = synthetic_field_2d(&g2, 1.0, &StreamPerturbation::sample_non_symmetric());
        let rot = rotation_2d(angle);
        let rv = rotate_field(&v, &rot).unwrap();
        let y = Vector2::new(r * t.cos(), r * t.sin());
        prop_assert!((divergence(&rv, &(rot * y)).unwrap() - divergence(&v, &y).unwrap()).abs() < 1e-12);

        let g3 = ShellGeometry::new(1.0, 2.0).unwrap();
        let u = test_field_3d(&g3, 3).unwrap();
        let rot3 = euler_rotation(EulerConvention::Zyz, a1, a2, a3);
        let ru = rotate_field(&u, &rot3).unwrap();
        let s = (1.0 - c * c).sqrt();
        let x = Vector3::new(r * s * t.cos(), r * s * t.sin(), r * c);
        let lhs = ru.jet(&(rot3 * x));
        let rhs = u.jet(&x);
        prop_assert!((lhs.value - rot3 * rhs.value).norm() < 1e-12);
        prop_assert!((lhs.divergence() - rhs.divergence()).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_norm_is_rotation_invariant(angle in 0.0f64..(2.0 * PI), m in 1u32..6) {
        let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
        let u = test_field_2d(&g, m).unwrap();
        let ru = rotate_field(&u, &rotation_2d(angle)).unwrap();
        let a = dirichlet_norm_sq(&u, &q());
        let b = dirichlet_norm_sq(&ru, &q());
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn averaging_preserves_flux_and_solenoidality(
        phi in -3.0f64..3.0,
        c in prop::collection::vec(-0.5f64..0.5, 4),
        k in 1u32..5,
        r in 1.05f64..1.95, t in 0.0f64..(2.0 * PI),
    ) {
        let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
        let pert = StreamPerturbation {
            modes: vec![
                StreamMode { k: 0, cos_part: poly(&[0.0, c[0], c[1]]), sin_part: ScalarProfile::zero() },
                StreamMode { k, cos_part: poly(&[c[2], c[3]]), sin_part: poly(&[0.0, 0.0, c[0]]) },
            ],
        };
        let v = synthetic_field_2d(&g, phi, &pert);
        let avg = average_2d(&v, &RotationSpec2D::new(64).unwrap());
        let sphere = QuadratureSpec::new(8, 32, 8).unwrap();
        prop_assert!((flux(&avg, r, &sphere).unwrap() - phi).abs() < 1e-10);
        let y = Vector2::new(r * t.cos(), r * t.sin());
        prop_assert!(divergence(&avg, &y).unwrap().abs() < 1e-10);
        let target = averaged_extension_2d(&g, phi, &pert.swirl());
        prop_assert!((avg.value(&y) - target.value(&y)).norm() < 1e-10);
    }

    #[test]
    fn shell_flux_of_radial_extension(phi in -5.0f64..5.0, r1 in 0.5f64..2.0, rho in 1.1f64..4.0, s in 0.0f64..1.0) {
        let g = ShellGeometry::new(r1, rho * r1).unwrap();
        let v = averaged_extension_3d(&g, phi);
        let r0 = r1 + s * (rho - 1.0) * r1;
        prop_assert!((flux(&v, r0, &QuadratureSpec::new(8, 16, 8).unwrap()).unwrap() - phi).abs() < 1e-12 * (1.0 + phi.abs()));
    }
}

#[test]
fn averaged_extension_is_fixed_by_averaging() {
    let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
    let v = averaged_extension_2d(&g, 1.3, &poly(&[0.1, 0.2, -0.3]));
    let avg = average_2d(&v, &RotationSpec2D::default());
    for (r, t) in [(1.2, 0.3), (1.8, 4.0)] {
        let y = Vector2::new(r * f64::cos(t), r * f64::sin(t));
        assert!((avg.value(&y) - v.value(&y)).norm() < 1e-14);
    }
    assert!(inflow_field_2d(&g, &poly(&[1.0])).is_err());
}
