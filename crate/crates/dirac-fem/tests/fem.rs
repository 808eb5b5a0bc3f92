mod common;

use dirac_fem::bands::bands_at_k;
use dirac_fem::bessel::disc_spectrum;
use dirac_fem::eigen::{solve_gep_with, EigenOptions};
use dirac_fem::fem::*;
use dirac_fem::lattice::{add, norm, LatticeBasis, QuasiMomentum, SQRT3};
use dirac_fem::linalg::{hermitian_defect, max_abs, quad_form, spmv};
use faer::c64;
use proptest::prelude::*;

/// |k + G|^2 over dual lattice vectors G, ascending.
fn free_space(k: [f64; 2], count: usize) -> Vec<f64> {
    let b = LatticeBasis::honeycomb();
    let mut v = Vec::new();
    for i in -4..=4 {
        for j in -4..=4 {
            let q = add(k, b.dual_vec([i as f64, j as f64]));
            v.push(norm(q).powi(2));
        }
    }
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

#[test]
fn matrices_hermitian_and_mass_positive() {
    let m = common::mesh0();
    let ops = assemble_bloch(m, 25.0, QuasiMomentum::new(1.3, -0.4)).unwrap();
    assert!(hermitian_defect(&ops.a) <= 1e-13 * max_abs(&ops.a));
    assert!(hermitian_defect(&ops.m) <= 1e-13 * max_abs(&ops.m));
    let x: Vec<c64> = (0..ops.n()).map(|i| c64::new((i as f64).sin(), (0.3 * i as f64).cos())).collect();
    assert!(quad_form(&ops.m, &x).re > 0.0);
    assert!(quad_form(&ops.a, &x).re > 0.0);
}

#[test]
fn constants_at_gamma() {
    let m = common::mesh0();
    let ops = assemble_bloch(m, 8.9, QuasiMomentum::new(0.0, 0.0)).unwrap();
    let one = vec![c64::new(1.0, 0.0); ops.n()];
    let a1 = spmv(&ops.a, &one);
    assert!(a1.iter().all(|z| z.norm() < 1e-9));
    assert!((quad_form(&ops.m, &one).re - SQRT3 / 2.0).abs() < 1e-12);
}

#[test]
fn free_space_spectrum_at_unit_contrast() {
    let m = common::mesh1();
    for k in [[0.7, 0.2], [0.0, 4.0 * std::f64::consts::PI / 3.0], [2.1, -1.4]] {
        let (l, _) = bands_at_k(m, 1.0, k, 7, false).unwrap();
        let e = free_space(k, 7);
        for (a, b) in l.iter().zip(&e) {
            assert!((a - b).abs() <= 5e-4 * b.max(1.0), "k={k:?}: {a} vs {b}");
        }
    }
}

#[test]
fn free_space_error_shrinks_at_p2_rate() {
    let k = [2.1, -1.4];
    let e = free_space(k, 7);
    let err = |m| {
        let (l, _) = bands_at_k(m, 1.0, k, 7, false).unwrap();
        l.iter().zip(&e).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max)
    };
    let ratio = err(common::mesh0()) / err(common::mesh1());
    assert!(ratio > 8.0, "error ratio {ratio}");
}

#[test]
fn both_bloch_forms_converge_to_free_space() {
    let m = common::mesh1();
    let k = [0.9, 0.5];
    let e = free_space(k, 4);
    for form in [BlochForm::NodalPhase, BlochForm::Shifted] {
        let ops = assemble_bloch_form(m, 1.0, QuasiMomentum { k }, form).unwrap();
        let sol = solve_gep_with(&ops.a, &ops.m, &EigenOptions::with_nev(4)).unwrap();
        for (p, b) in sol.pairs.iter().zip(&e) {
            assert!((p.lambda - b).abs() <= 1e-4 * b, "{form:?}: {} vs {b}", p.lambda);
        }
    }
}

#[test]
fn inclusion_dirichlet_matches_disc_spectrum() {
    let m = common::mesh1();
    let ops = assemble_inclusion_dirichlet(m).unwrap();
    let sol = solve_gep_with(&ops.a, &ops.m, &EigenOptions::with_nev(6)).unwrap();
    let disc = disc_spectrum(0.2, 6).unwrap();
    let exact: Vec<f64> = disc.iter().flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity)).collect();
    for (p, e) in sol.pairs.iter().zip(&exact) {
        // Discrete values sit above: polygonal domain inside the disc, conforming elements.
        assert!(p.lambda > *e && (p.lambda - e) / e < 5e-3, "{} vs {e}", p.lambda);
    }
    assert!((sol.pairs[1].lambda - sol.pairs[2].lambda).abs() < 1e-8 * sol.pairs[1].lambda);
}

#[test]
fn cell_variants_are_hermitian() {
    let m = common::mesh0();
    for bc in [BcKind::CellNeumann, BcKind::CellDirichlet] {
        let ops = assemble_cell_variant(m, 100.0, bc).unwrap();
        assert!(hermitian_defect(&ops.a) <= 1e-13 * max_abs(&ops.a));
        assert_eq!(ops.space, DofSpace::Nodes);
    }
}

#[test]
fn split_forms_add_up() {
    let m = common::mesh0();
    let k = [0.4, 1.1];
    let g = 37.0;
    let s = assemble_split(m, k).unwrap();
    let full = assemble_bloch(m, g, QuasiMomentum { k }).unwrap();
    let x: Vec<c64> = (0..m.n_dofs()).map(|i| c64::new(1.0 + (i % 7) as f64, (i % 3) as f64)).collect();
    let lhs = quad_form(&full.a, &x);
    let rhs = quad_form(&s.a_plus, &x) + quad_form(&s.a_minus, &x) * g;
    assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm());
    assert!((quad_form(&full.m, &x) - quad_form(&s.m, &x)).norm() <= 1e-12 * lhs.norm());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn spectrum_is_dual_lattice_periodic(kx in -4.0f64..4.0, ky in -4.0f64..4.0, i in -1i32..=1, j in -1i32..=1) {
        let m = common::mesh0();
        let b = LatticeBasis::honeycomb();
        let k2 = add([kx, ky], b.dual_vec([i as f64, j as f64]));
        let (l1, _) = bands_at_k(m, 20.0, [kx, ky], 4, false).unwrap();
        let (l2, _) = bands_at_k(m, 20.0, k2, 4, false).unwrap();
        for (a, c) in l1.iter().zip(&l2) {
            prop_assert!((a - c).abs() <= 1e-8 * c.abs().max(1.0));
        }
    }

    #[test]
    fn time_reversal_symmetry(kx in -4.0f64..4.0, ky in -4.0f64..4.0) {
        let m = common::mesh0();
        let (l1, _) = bands_at_k(m, 20.0, [kx, ky], 3, false).unwrap();
        let (l2, _) = bands_at_k(m, 20.0, [-kx, -ky], 3, false).unwrap();
        for (a, c) in l1.iter().zip(&l2) {
            prop_assert!((a - c).abs() <= 1e-8 * c.abs().max(1.0));
        }
    }
}
