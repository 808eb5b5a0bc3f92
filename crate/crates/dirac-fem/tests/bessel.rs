mod common;

use common::{oracle_j, oracle_zero};
use dirac_fem::bessel::*;
use proptest::prelude::*;

// Zeros produced by oracle_zero, frozen.
const Z01: f64 = 2.404_825_557_695_773;
const Z02: f64 = 5.520_078_110_286_311;
const Z11: f64 = 3.831_705_970_207_512;
const Z21: f64 = 5.135_622_301_840_683;

#[test]
fn oracle_reproduces_frozen_zeros() {
    for (p, q, z) in [(0, 1, Z01), (0, 2, Z02), (1, 1, Z11), (2, 1, Z21)] {
        assert!((oracle_zero(p, q) - z).abs() < 1e-12, "oracle z_{p},{q}");
    }
}

#[test]
fn zeros_match_oracle() {
    for p in 0..=5 {
        for q in 1..=10 {
            let z = bessel_zero(p, q).unwrap().z;
            let o = oracle_zero(p, q);
            assert!((z - o).abs() < 1e-10, "z_{p},{q}: {z} vs {o}");
            assert!(bessel_j(p as i32, z).unwrap().abs() <= 1e-12);
        }
    }
}

#[test]
fn values_match_oracle() {
    for p in 0..=6 {
        for i in 0..60 {
            let x = 0.5 * i as f64;
            let a = bessel_j(p, x).unwrap();
            let b = oracle_j(p as usize, x);
            assert!((a - b).abs() < 1e-12, "J_{p}({x}): {a} vs {b}");
        }
    }
}

#[test]
fn interlacing() {
    for p in 0..=5 {
        for q in 1..=10 {
            let z = |p, q| bessel_zero(p, q).unwrap().z;
            assert!(z(p, q) < z(p + 1, q));
            assert!(z(p + 1, q) < z(p, q + 1));
        }
    }
}

#[test]
fn delta_tilde_one_for_r0_point_two() {
    let d = delta_tilde(0.2, 1).unwrap();
    assert!((d.value - (Z01 / 0.2).powi(2)).abs() < 1e-9);
    assert!((d.value - 144.579_649).abs() < 1e-5);
    assert!(d.satisfies_s);
}

#[test]
fn radial_mode_normalized_and_mean() {
    // Radial quadrature: int_0^R0 2 pi r p(r)^2 dr and int 2 pi r p(r) dr.
    let r0 = 0.2;
    for q in 1..=3 {
        let n = 4000;
        let h = r0 / n as f64;
        let (mut norm, mut mean) = (0.0, 0.0);
        for i in 0..n {
            // Gauss-Legendre, two points per panel.
            for t in [-1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt()] {
                let r = h * (i as f64 + 0.5 + 0.5 * t);
                let v = disc_eigenfunction(q, r0, [r, 0.0]).unwrap();
                norm += 0.5 * h * 2.0 * std::f64::consts::PI * r * v * v;
                mean += 0.5 * h * 2.0 * std::f64::consts::PI * r * v;
            }
        }
        assert!((norm - 1.0).abs() < 1e-8, "q={q} norm {norm}");
        let expect = disc_eigenfunction_mean(q, r0).unwrap();
        assert!((mean - expect).abs() < 1e-8, "q={q} mean {mean} vs {expect}");
        assert!(expect != 0.0);
    }
}

#[test]
fn spectrum_entries_and_multiplicities() {
    let s = disc_spectrum(0.2, 12).unwrap();
    for e in &s {
        assert_eq!(e.multiplicity, if e.p == 0 { 1 } else { 2 });
        assert_eq!(e.satisfies_s, e.p == 0);
    }
    assert!(s.windows(2).all(|w| w[0].value < w[1].value));
    assert!(disc_spectrum(-1.0, 3).is_err());
    assert!(bessel_zero(0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectrum_scales_inverse_square(alpha in 0.3f64..3.0) {
        let a = disc_spectrum(0.2, 10).unwrap();
        let b = disc_spectrum(0.2 * alpha, 10).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((y.value - x.value / (alpha * alpha)).abs() <= 1e-10 * x.value);
            prop_assert_eq!((x.p, x.q), (y.p, y.q));
        }
    }

    #[test]
    fn three_term_recurrence(p in 1usize..6, x in 0.1f64..40.0) {
        let lhs = bessel_j(p as i32 - 1, x).unwrap() + bessel_j(p as i32 + 1, x).unwrap();
        let rhs = 2.0 * p as f64 / x * bessel_j(p as i32, x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + rhs.abs()));
    }
}
