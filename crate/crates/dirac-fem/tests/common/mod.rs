#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use dirac_fem::mesh::{build_mesh, CellGeometry, Mesh};

/// J_p(x) = (1/pi) int_0^pi cos(p t - x sin t) dt. The integrand is smooth and
/// periodic after reflection, so the trapezoid rule converges geometrically.
pub fn oracle_j(p: usize, x: f64) -> f64 {
    let n = 400 + 4 * x.ceil() as usize;
    let h = PI / n as f64;
    let f = |t: f64| (p as f64 * t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for i in 1..n {
        s += f(i as f64 * h);
    }
    s * h / PI
}

/// q-th positive zero of J_p by sign scan and bisection on the oracle.
pub fn oracle_zero(p: usize, q: usize) -> f64 {
    let step = 0.05;
    let mut a = p as f64 + 0.01;
    let mut fa = oracle_j(p, a);
    let mut found = 0;
    loop {
        let b = a + step;
        let fb = oracle_j(p, b);
        if fa * fb < 0.0 {
            found += 1;
            if found == q {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                for _ in 0..80 {
                    let m = 0.5 * (lo + hi);
                    let fm = oracle_j(p, m);
                    if fm * flo > 0.0 {
                        lo = m;
                        flo = fm;
                    } else {
                        hi = m;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
}

fn cached(slot: &'static OnceLock<Mesh>, refine: usize) -> &'static Mesh {
    slot.get_or_init(|| build_mesh(&CellGeometry::default(), refine, 2).expect("mesh"))
}

pub fn mesh0() -> &'static Mesh {
    static M: OnceLock<Mesh> = OnceLock::new();
    cached(&M, 0)
}

pub fn mesh1() -> &'static Mesh {
    static M: OnceLock<Mesh> = OnceLock::new();
    cached(&M, 1)
}

pub fn mesh2() -> &'static Mesh {
    static M: OnceLock<Mesh> = OnceLock::new();
    cached(&M, 2)
}

pub fn mesh3() -> &'static Mesh {
    static M: OnceLock<Mesh> = OnceLock::new();
    cached(&M, 3)
}
