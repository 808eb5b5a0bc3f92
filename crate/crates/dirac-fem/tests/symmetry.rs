mod common;

use std::f64::consts::PI;

use dirac_fem::asymptotics::build_orbital;
use dirac_fem::dirac::{dirac_state, k_point};
use dirac_fem::fem::assemble_bloch;
use dirac_fem::lattice::QuasiMomentum;
use dirac_fem::linalg::{cis, norm2};
use dirac_fem::symmetry::*;
use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vectors(n: usize, count: usize, seed: u64) -> Vec<Vec<c64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect())
        .collect()
}

fn max_diff(a: &[c64], b: &[c64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn rotation_cubes_and_pc_squares_to_identity() {
    let m = common::mesh1();
    for k in [k_point(), [0.3, -1.1]] {
        let rot = build_rotation_action(m, k).unwrap();
        let pc = build_pc_action(m, k).unwrap();
        for u in random_vectors(m.n_dofs(), 3, 1) {
            assert!(max_diff(&pc.apply_n(&u, 2), &u) < 1e-12);
            if k == k_point() {
                assert!(max_diff(&rot.apply_n(&u, 3), &u) < 1e-12);
            }
        }
    }
}

#[test]
fn rotation_commutes_with_k_fiber_operator() {
    let m = common::mesh1();
    let k = k_point();
    let rot = build_rotation_action(m, k).unwrap();
    for g in [1.0, 13.0, 100.0] {
        let ops = assemble_bloch(m, g, QuasiMomentum { k }).unwrap();
        let r = commutation_residual(&ops.a, &rot, &random_vectors(m.n_dofs(), 20, 2));
        assert!(r < 1e-9, "g={g}: {r:e}");
        let rm = commutation_residual(&ops.m, &rot, &random_vectors(m.n_dofs(), 5, 3));
        assert!(rm < 1e-9);
    }
}

#[test]
fn orbitals_classified_and_related_by_pc() {
    let m = common::mesh1();
    let k = k_point();
    let orb = build_orbital(m, k, 1).unwrap();
    let ops = assemble_bloch(m, 100.0, QuasiMomentum { k }).unwrap();
    let rot = build_rotation_action(m, k).unwrap();
    let pc = build_pc_action(m, k).unwrap();
    let (la, mu) = classify(&orb.p_a, &rot, &ops.m);
    assert_eq!(la, Label::Tau);
    assert!((mu - cis(2.0 * PI / 3.0)).norm() < 1e-10);
    let pca = pc.apply(&orb.p_a);
    assert_eq!(classify(&pca, &rot, &ops.m).0, Label::TauBar);
    assert_eq!(classify(&orb.p_b, &rot, &ops.m).0, Label::TauBar);
    // PC pA = e^{-2 pi i / 3} pB
    let expect: Vec<c64> = orb.p_b.iter().map(|x| x * cis(-2.0 * PI / 3.0)).collect();
    assert!(max_diff(&pca, &expect) < 1e-10 * norm2(&expect).max(1.0), "{}", max_diff(&pca, &expect));
}

#[test]
fn projector_splits_into_sectors() {
    let m = common::mesh0();
    let k = k_point();
    let rot = build_rotation_action(m, k).unwrap();
    let ops = assemble_bloch(m, 1.0, QuasiMomentum { k }).unwrap();
    let u = &random_vectors(m.n_dofs(), 1, 4)[0];
    let tau = cis(2.0 * PI / 3.0);
    let parts: Vec<Vec<c64>> = [c64::new(1.0, 0.0), tau, tau.conj()].iter().map(|&nu| projector(u, &rot, nu)).collect();
    let sum: Vec<c64> = (0..u.len()).map(|i| parts[0][i] + parts[1][i] + parts[2][i]).collect();
    assert!(max_diff(&sum, u) < 1e-12);
    for (p, nu) in parts.iter().zip([c64::new(1.0, 0.0), tau, tau.conj()]) {
        let rp = rot.apply(p);
        let np: Vec<c64> = p.iter().map(|x| x * nu).collect();
        assert!(max_diff(&rp, &np) < 1e-12);
    }
    // Sectors are M-orthogonal.
    assert!(inner_m(&ops.m, &parts[1], &parts[2]).norm() < 1e-10);
}

#[test]
fn dirac_pair_labels_at_high_contrast() {
    let st = dirac_state(common::mesh1(), 100.0, 3).unwrap();
    assert_eq!(st.labels, [Label::Tau, Label::TauBar]);
    assert_eq!(st.n, 1);
}
