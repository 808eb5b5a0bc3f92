mod common;

use dirac_fem::dirac::*;
use dirac_fem::lattice::norm;
use dirac_fem::symmetry::Label;

#[test]
fn pair_at_k_for_high_contrast() {
    let m = common::mesh1();
    let (d, l) = detect_degeneracy(m, 100.0, k_point(), 3, DEGENERACY_TOL).unwrap();
    match d {
        Degeneracy::Pair { n, gap_rel, .. } => {
            assert_eq!(n, 1);
            assert!(gap_rel < 1e-9);
        }
        other => panic!("{other:?}"),
    }
    assert!(l[2] > l[1] * (1.0 + 1e-3));
}

#[test]
fn pair_sits_above_simple_branch_at_low_contrast() {
    let m = common::mesh0();
    let (d, _) = detect_degeneracy(m, 5.0, k_point(), 3, DEGENERACY_TOL).unwrap();
    assert!(matches!(d, Degeneracy::Pair { n: 2, .. }), "{d:?}");
    let s = branch_sample(m, 5.0).unwrap();
    assert_eq!(s.simple_label, Label::One);
    assert_eq!(s.pair_labels, [Label::Tau, Label::TauBar]);
    assert_eq!((s.simple_band, s.pair_band), (1, 2));
}

#[test]
fn velocity_formula_matches_cone() {
    let m = common::mesh1();
    let st = dirac_state(m, 100.0, 3).unwrap();
    let v = st.velocity;
    assert!(v.v_other < 1e-8 * v.v_formula);
    let cone = cone_fit(m, 100.0, k_point(), st.n, st.lambda_d, &default_directions(6), 1e-3 * norm(k_point())).unwrap();
    assert!((cone.mean_slope - v.v_formula).abs() < 1e-4 * v.v_formula, "{} vs {}", cone.mean_slope, v.v_formula);
    assert!(cone.isotropy_dev < 1e-4);
    assert!(cone.warning.is_none());
    for (u, l) in cone.upper.iter().zip(&cone.lower) {
        assert!((u - l).abs() < 1e-4 * u);
    }
}

#[test]
fn report_fields_consistent() {
    let r = dirac_report(common::mesh0(), 100.0, 3, None, 6).unwrap();
    assert_eq!(r.labels, vec![Label::Tau, Label::TauBar]);
    assert!(r.passed_nondegeneracy);
    assert_eq!(r.v_cone.len(), 6);
    assert!((r.v_cone_mean - r.v_formula).abs() < 1e-3 * r.v_formula);
    let d = dirac_fem::bands::dirichlet_eigenvalue(common::mesh0(), 1).unwrap();
    assert!(r.lambda_d < d);
}

#[test]
fn transition_between_eleven_and_sixteen() {
    let m = common::mesh0();
    let t = transition_scan(m, 10.0, 20.0, 1e-3).unwrap();
    assert!(t.g_c > 11.0 && t.g_c < 16.0, "g_c = {}", t.g_c);
    assert!(t.triple_spread < 1e-3, "{}", t.triple_spread);
    for s in &t.samples {
        assert_eq!(s.simple_label, Label::One);
        assert_eq!(s.pair_labels, [Label::Tau, Label::TauBar]);
        if s.g < t.g_c * 0.99 {
            assert_eq!(s.simple_band, 1);
        }
        if s.g > t.g_c * 1.01 {
            assert_eq!(s.pair_band, 1);
        }
    }
    assert!(transition_scan(m, 20.0, 30.0, 1e-3).is_err());
    assert!(transition_scan(m, 5.0, 4.0, 1e-3).is_err());
}

#[test]
fn velocity_decays_like_inverse_contrast() {
    let s = vd_scaling_study(common::mesh0(), &[500.0, 1000.0, 2000.0], 0).unwrap();
    assert!((s.slope + 1.0).abs() < 0.05, "slope {}", s.slope);
    assert!(s.rows.iter().all(|r| r.v_cone.is_none()));
}

#[test]
fn pair_at_given_band() {
    let m = common::mesh1();
    let a = dirac_state(m, 100.0, 3).unwrap();
    let b = dirac_state_at(m, 100.0, 1).unwrap();
    assert!((a.lambda_d - b.lambda_d).abs() < 1e-9 * a.lambda_d);
    assert!((a.velocity.v_formula - b.velocity.v_formula).abs() < 1e-6 * a.velocity.v_formula);
    assert!(dirac_state_at(m, 100.0, 2).is_err());
    assert!(dirac_state_at(m, 100.0, 0).is_err());
    // second radial pair sits above five disc modes per inclusion
    let c = dirac_state_at(m, 300.0, 11).unwrap();
    assert_eq!(c.labels, [Label::Tau, Label::TauBar]);
    assert!(c.gap_rel < 1e-9);
}
