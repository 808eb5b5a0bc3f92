//! Triangular lattice, dual lattice and point-group data of the honeycomb cell.

use std::f64::consts::PI;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub type Mat2 = [[f64; 2]; 2];

#[inline]
pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[inline]
pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

#[inline]
pub fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeBasis {
    pub v1: Vec2,
    pub v2: Vec2,
    pub k1: Vec2,
    pub k2: Vec2,
}

/// Dual vectors with `k_l . v_m = 2 pi delta_lm`.
pub fn dual_basis(v1: Vec2, v2: Vec2) -> Result<(Vec2, Vec2)> {
    let det = cross(v1, v2);
    if det.abs() < 1e-12 {
        return Err(Error::Geometry(format!(
            "degenerate lattice basis: |v1 ^ v2| = {:e}",
            det.abs()
        )));
    }
    let s = 2.0 * PI / det;
    Ok(([v2[1] * s, -v2[0] * s], [-v1[1] * s, v1[0] * s]))
}

impl LatticeBasis {
    pub fn new(v1: Vec2, v2: Vec2) -> Result<Self> {
        let (k1, k2) = dual_basis(v1, v2)?;
        Ok(Self { v1, v2, k1, k2 })
    }

    /// v1 = (sqrt3/2, 1/2), v2 = (sqrt3/2, -1/2).
    pub fn honeycomb() -> Self {
        Self::new([SQRT3 / 2.0, 0.5], [SQRT3 / 2.0, -0.5]).expect("honeycomb basis is regular")
    }

    pub fn cell_area(&self) -> f64 {
        cross(self.v1, self.v2).abs()
    }

    /// Lower-left corner of the fundamental rhombus.
    pub fn origin(&self) -> Vec2 {
        [-1.0 / SQRT3, 0.0]
    }

    /// Coordinates of `x - origin` in the (v1, v2) basis.
    pub fn to_frac(&self, x: Vec2) -> Vec2 {
        let y = sub(x, self.origin());
        // k_l . v_m = 2 pi delta_lm gives the inverse directly.
        [dot(self.k1, y) / (2.0 * PI), dot(self.k2, y) / (2.0 * PI)]
    }

    pub fn from_frac(&self, t: Vec2) -> Vec2 {
        add(self.origin(), self.lattice_vec(t))
    }

    pub fn lattice_vec(&self, n: Vec2) -> Vec2 {
        add(scale(n[0], self.v1), scale(n[1], self.v2))
    }

    pub fn dual_vec(&self, n: Vec2) -> Vec2 {
        add(scale(n[0], self.k1), scale(n[1], self.k2))
    }

    /// Split `x = x0 + v` with `v` in the lattice and `x0` in the half-open
    /// rhombus anchored at `origin()`. Returns `x0` and the integer
    /// coordinates of `v`.
    pub fn reduce(&self, x: Vec2) -> (Vec2, [i64; 2]) {
        const TOL: f64 = 1e-9;
        let t = self.to_frac(x);
        let mut n = [0i64; 2];
        let mut r = [0.0; 2];
        for i in 0..2 {
            let mut f = t[i].floor();
            let mut rem = t[i] - f;
            if rem > 1.0 - TOL {
                rem -= 1.0;
                f += 1.0;
            }
            if rem.abs() < TOL {
                rem = 0.0;
            }
            n[i] = f as i64;
            r[i] = rem;
        }
        (self.from_frac(r), n)
    }

    pub fn reduce_to_cell(&self, x: Vec2) -> (Vec2, Vec2) {
        let (x0, n) = self.reduce(x);
        (x0, self.lattice_vec([n[0] as f64, n[1] as f64]))
    }
}

/// K = (k1 - k2)/3 and K' = -K.
pub fn vertex_points(basis: &LatticeBasis) -> (Vec2, Vec2) {
    let k = scale(1.0 / 3.0, sub(basis.k1, basis.k2));
    (k, scale(-1.0, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointGroupData {
    /// Clockwise rotation by 2 pi / 3.
    pub r: Mat2,
    pub tau: c64,
    pub xi: [c64; 2],
    pub x_c: Vec2,
    pub v_a: Vec2,
    pub v_b: Vec2,
}

impl PointGroupData {
    pub fn honeycomb() -> Self {
        let s = SQRT3 / 2.0;
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            r: [[-0.5, s], [-s, -0.5]],
            tau: c64::new(-0.5, s),
            xi: [c64::new(inv, 0.0), c64::new(0.0, inv)],
            x_c: [1.0 / (2.0 * SQRT3), -0.5],
            v_a: [0.0, 0.0],
            v_b: [1.0 / SQRT3, 0.0],
        }
    }

    pub fn r_star(&self) -> Mat2 {
        transpose(&self.r)
    }

    /// x_c + R*(x - x_c)
    pub fn rotate(&self, x: Vec2) -> Vec2 {
        add(self.x_c, mat_vec(&self.r_star(), sub(x, self.x_c)))
    }

    /// 2 x_c - x
    pub fn invert(&self, x: Vec2) -> Vec2 {
        sub(scale(2.0, self.x_c), x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiMomentum {
    pub k: Vec2,
}

impl QuasiMomentum {
    pub fn new(kx: f64, ky: f64) -> Self {
        Self { k: [kx, ky] }
    }

    /// Representative in the unit parallelogram spanned by k1, k2.
    pub fn reduced(&self, basis: &LatticeBasis) -> Self {
        let c = [
            dot(self.k, basis.v1) / (2.0 * PI),
            dot(self.k, basis.v2) / (2.0 * PI),
        ];
        let f = [c[0] - c[0].floor(), c[1] - c[1].floor()];
        Self {
            k: basis.dual_vec(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPath {
    pub waypoints: Vec<(String, QuasiMomentum)>,
    pub samples_per_segment: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSample {
    pub k: QuasiMomentum,
    pub arclength: f64,
}

impl KPath {
    pub fn new(waypoints: Vec<(String, QuasiMomentum)>, samples_per_segment: usize) -> Result<Self> {
        if samples_per_segment == 0 {
            return Err(Error::Config("samples per segment must be >= 1".into()));
        }
        if waypoints.len() < 2 {
            return Err(Error::Config("a k-path needs at least two waypoints".into()));
        }
        for w in waypoints.windows(2) {
            if norm(sub(w[0].1.k, w[1].1.k)) < 1e-14 {
                return Err(Error::Config(format!(
                    "consecutive waypoints {} and {} coincide",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self {
            waypoints,
            samples_per_segment,
        })
    }

    pub fn len(&self) -> usize {
        (self.waypoints.len() - 1) * self.samples_per_segment + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> Vec<KSample> {
        let n = self.samples_per_segment;
        let mut out = Vec::with_capacity(self.len());
        let mut s0 = 0.0;
        for (seg, w) in self.waypoints.windows(2).enumerate() {
            let (a, b) = (w[0].1.k, w[1].1.k);
            let d = sub(b, a);
            let len = norm(d);
            let start = if seg == 0 { 0 } else { 1 };
            for i in start..=n {
                let t = i as f64 / n as f64;
                // Waypoints are taken verbatim rather than interpolated.
                let k = if i == 0 {
                    a
                } else if i == n {
                    b
                } else {
                    add(a, scale(t, d))
                };
                out.push(KSample {
                    k: QuasiMomentum { k },
                    arclength: s0 + t * len,
                });
            }
            s0 += len;
        }
        out
    }

    /// Arclength of each waypoint.
    pub fn ticks(&self) -> Vec<(String, f64)> {
        let mut s = 0.0;
        let mut out = vec![(self.waypoints[0].0.clone(), 0.0)];
        for w in self.waypoints.windows(2) {
            s += norm(sub(w[1].1.k, w[0].1.k));
            out.push((w[1].0.clone(), s));
        }
        out
    }
}

/// The path M -> Gamma -> K -> M with M = k1/2.
pub fn kpath_mgkm(samples: usize) -> Result<KPath> {
    let basis = LatticeBasis::honeycomb();
    let (k, _) = vertex_points(&basis);
    let m = scale(0.5, basis.k1);
    KPath::new(
        vec![
            ("M".into(), QuasiMomentum { k: m }),
            ("G".into(), QuasiMomentum { k: [0.0, 0.0] }),
            ("K".into(), QuasiMomentum { k }),
            ("M".into(), QuasiMomentum { k: m }),
        ],
        samples,
    )
}
