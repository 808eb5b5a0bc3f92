//! Bessel functions of integer order, their zeros, and the Dirichlet
//! spectrum of a disc.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this argument the power series is used.
const SERIES_MAX_X: f64 = 2.0;

fn series(p: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=p {
        term *= h / k as f64;
    }
    let h2 = h * h;
    let mut sum = 0.0;
    let mut c = 0.0;
    for k in 0..60 {
        // Kahan-compensated accumulation.
        let y = term - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
        term *= -h2 / ((k + 1) as f64 * (k + 1 + p) as f64);
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Miller's downward recurrence normalized by J0 + 2 sum J_2k = 1.
fn miller(p: usize, x: f64) -> f64 {
    let m = (p.max(x as usize) as f64 + 30.0 + (40.0 * p.max(x as usize) as f64).sqrt()) as usize;
    let n_start = m + (m % 2);
    let mut jp1 = 0.0;
    let mut j = 1e-30;
    let mut result = 0.0;
    let mut norm = 0.0;
    let tx = 2.0 / x;
    for n in (1..=n_start).rev() {
        let jm1 = n as f64 * tx * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
        let idx = n - 1;
        if idx == p {
            result = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    if p == 0 {
        result = j;
    }
    result / norm
}

/// J_p(x) for x >= 0.
pub fn bessel_j(p: i32, x: f64) -> Result<f64> {
    if p < 0 {
        return Err(Error::Invalid(format!("Bessel order must be >= 0, got {p}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Invalid(format!("Bessel argument must be >= 0, got {x}")));
    }
    Ok(jn(p as usize, x))
}

pub(crate) fn jn(p: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if p == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_MAX_X {
        series(p, x)
    } else {
        miller(p, x)
    }
}

/// d/dx J_p(x).
pub fn bessel_j_prime(p: usize, x: f64) -> f64 {
    if p == 0 {
        -jn(1, x)
    } else {
        0.5 * (jn(p - 1, x) - jn(p + 1, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselZero {
    pub p: usize,
    pub q: usize,
    pub z: f64,
}

fn refine_root(p: usize, mut a: f64, mut b: f64) -> f64 {
    let mut fa = jn(p, a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = jn(p, m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut z = 0.5 * (a + b);
    for _ in 0..3 {
        let d = bessel_j_prime(p, z);
        if d == 0.0 {
            break;
        }
        let step = jn(p, z) / d;
        if step.abs() > (b - a).abs() * 4.0 + 1e-14 {
            break;
        }
        z -= step;
    }
    z
}

/// All positive zeros of J_p below `xmax`, ascending.
pub fn zeros_below(p: usize, xmax: f64) -> Vec<f64> {
    let step = PI / 8.0;
    let mut x = if p == 0 { 0.5 } else { p as f64 };
    let mut fx = jn(p, x);
    let mut out = Vec::new();
    while x < xmax {
        let xn = x + step;
        let fn_ = jn(p, xn);
        if (fx > 0.0) != (fn_ > 0.0) || fn_ == 0.0 {
            let z = refine_root(p, x, xn);
            if z < xmax {
                out.push(z);
            }
        }
        x = xn;
        fx = fn_;
    }
    out
}

/// The q-th positive zero of J_p (q >= 1).
pub fn bessel_zero(p: usize, q: usize) -> Result<BesselZero> {
    if q == 0 {
        return Err(Error::Invalid("zero index q starts at 1".into()));
    }
    let step = PI / 8.0;
    let mut x = if p == 0 { 0.5 } else { p as f64 };
    let mut fx = jn(p, x);
    let mut found = 0;
    loop {
        let xn = x + step;
        let fn_ = jn(p, xn);
        if (fx > 0.0) != (fn_ > 0.0) || fn_ == 0.0 {
            found += 1;
            if found == q {
                return Ok(BesselZero {
                    p,
                    q,
                    z: refine_root(p, x, xn),
                });
            }
        }
        x = xn;
        fx = fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscSpectrumEntry {
    pub value: f64,
    pub p: usize,
    pub q: usize,
    pub multiplicity: usize,
    pub satisfies_s: bool,
    /// Position of the first copy in the multiplicity-counted ordering.
    pub first_index: usize,
}

/// Simple with an eigenfunction of nonzero mean: exactly the radial modes.
pub fn condition_s(p: usize, _q: usize) -> bool {
    p == 0
}

/// Leading Dirichlet eigenvalues of a disc of radius `r0`, grouped by
/// (p, q), covering at least `count` eigenvalues counted with multiplicity.
pub fn disc_spectrum(r0: f64, count: usize) -> Result<Vec<DiscSpectrumEntry>> {
    if !(r0 > 0.0) {
        return Err(Error::Invalid(format!("disc radius must be > 0, got {r0}")));
    }
    let mut zmax = 16.0;
    loop {
        let mut all = Vec::new();
        let mut p = 0;
        while (p as f64) < zmax {
            for (i, z) in zeros_below(p, zmax).into_iter().enumerate() {
                all.push((z, p, i + 1));
            }
            p += 1;
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: usize = all.iter().map(|e| if e.1 == 0 { 1 } else { 2 }).sum();
        if total >= count + 2 {
            let mut out = Vec::new();
            let mut idx = 1;
            for (z, p, q) in all {
                if idx > count {
                    break;
                }
                let multiplicity = if p == 0 { 1 } else { 2 };
                out.push(DiscSpectrumEntry {
                    value: (z / r0).powi(2),
                    p,
                    q,
                    multiplicity,
                    satisfies_s: condition_s(p, q),
                    first_index: idx,
                });
                idx += multiplicity;
            }
            return Ok(out);
        }
        zmax *= 2.0;
    }
}

/// delta-tilde_n counted with multiplicity (n >= 1).
pub fn delta_tilde(r0: f64, n: usize) -> Result<DiscSpectrumEntry> {
    let spec = disc_spectrum(r0, n)?;
    spec.into_iter()
        .find(|e| n >= e.first_index && n < e.first_index + e.multiplicity)
        .ok_or_else(|| Error::Numerical(format!("disc eigenvalue {n} not found")))
}

/// Disc spectrum entry of the q-th radial (J0) mode.
pub fn radial_entry(r0: f64, q: usize) -> Result<DiscSpectrumEntry> {
    if q == 0 {
        return Err(Error::Invalid("radial index q must be >= 1".into()));
    }
    let mut count = 8;
    loop {
        let spec = disc_spectrum(r0, count)?;
        if let Some(e) = spec.iter().find(|e| e.p == 0 && e.q == q) {
            return Ok(*e);
        }
        count *= 2;
    }
}

/// Normalized radial Dirichlet eigenfunction J0(z r / R0) / (sqrt(pi) |J0'(z)| R0).
pub fn disc_eigenfunction(q: usize, r0: f64, x: [f64; 2]) -> Result<f64> {
    let z = bessel_zero(0, q)?.z;
    Ok(radial_mode(z, r0, x))
}

pub(crate) fn radial_mode(z: f64, r0: f64, x: [f64; 2]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r >= r0 {
        return 0.0;
    }
    jn(0, z * r / r0) / (PI.sqrt() * bessel_j_prime(0, z).abs() * r0)
}

/// Closed-form mean of the radial mode over the disc.
pub fn disc_eigenfunction_mean(q: usize, r0: f64) -> Result<f64> {
    let z = bessel_zero(0, q)?.z;
    Ok(-2.0 * PI.sqrt() * (r0 / z) * bessel_j_prime(0, z).signum())
}
