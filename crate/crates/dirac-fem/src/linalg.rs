//! Small complex sparse and dense vector helpers.

use faer::c64;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

pub type SpMat = SparseColMat<usize, c64>;

pub fn from_triplets(n_rows: usize, n_cols: usize, t: &[Triplet<usize, usize, c64>]) -> Result<SpMat> {
    SpMat::try_new_from_triplets(n_rows, n_cols, t)
        .map_err(|e| Error::Numerical(format!("sparse matrix creation failed: {e:?}")))
}

/// y = A x
pub fn spmv(a: &SpMat, x: &[c64]) -> Vec<c64> {
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    spmv_into(a, x, &mut y);
    y
}

pub fn spmv_into(a: &SpMat, x: &[c64], y: &mut [c64]) {
    let r = a.as_ref();
    let cp = r.col_ptr();
    let ri = r.row_idx();
    let v = r.val();
    y.iter_mut().for_each(|s| *s = c64::new(0.0, 0.0));
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == c64::new(0.0, 0.0) {
            continue;
        }
        for p in cp[j]..cp[j + 1] {
            y[ri[p]] += v[p] * xj;
        }
    }
}

/// Iterate over stored entries as (row, col, value).
pub fn entries(a: &SpMat) -> Vec<(usize, usize, c64)> {
    let r = a.as_ref();
    let cp = r.col_ptr();
    let ri = r.row_idx();
    let v = r.val();
    let mut out = Vec::with_capacity(v.len());
    for j in 0..a.ncols() {
        for p in cp[j]..cp[j + 1] {
            out.push((ri[p], j, v[p]));
        }
    }
    out
}

pub fn max_abs(a: &SpMat) -> f64 {
    a.as_ref().val().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Infinity norm (max absolute row sum).
pub fn norm_inf(a: &SpMat) -> f64 {
    let mut rows = vec![0.0; a.nrows()];
    for (i, _, v) in entries(a) {
        rows[i] += v.norm();
    }
    rows.into_iter().fold(0.0, f64::max)
}

/// max |A - A^H| over stored entries.
pub fn hermitian_defect(a: &SpMat) -> f64 {
    let mut map = std::collections::HashMap::new();
    for (i, j, v) in entries(a) {
        map.insert((i, j), v);
    }
    let mut worst: f64 = 0.0;
    for (&(i, j), &v) in &map {
        let w = map.get(&(j, i)).copied().unwrap_or(c64::new(0.0, 0.0));
        worst = worst.max((v - w.conj()).norm());
    }
    worst
}

/// Rows and columns `keep` of `a`, renumbered consecutively.
pub fn submatrix(a: &SpMat, rows: &[usize], cols: &[usize]) -> Result<SpMat> {
    let mut rmap = vec![usize::MAX; a.nrows()];
    for (k, &i) in rows.iter().enumerate() {
        rmap[i] = k;
    }
    let mut cmap = vec![usize::MAX; a.ncols()];
    for (k, &j) in cols.iter().enumerate() {
        cmap[j] = k;
    }
    let t: Vec<_> = entries(a)
        .into_iter()
        .filter(|&(i, j, _)| rmap[i] != usize::MAX && cmap[j] != usize::MAX)
        .map(|(i, j, v)| Triplet::new(rmap[i], cmap[j], v))
        .collect();
    from_triplets(rows.len(), cols.len(), &t)
}

/// a + s b
pub fn add_scaled(a: &SpMat, s: c64, b: &SpMat) -> Result<SpMat> {
    let mut t: Vec<_> = entries(a).into_iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    t.extend(entries(b).into_iter().map(|(i, j, v)| Triplet::new(i, j, s * v)));
    from_triplets(a.nrows(), a.ncols(), &t)
}

/// Coordinate text export: one `row col re im` line per stored entry.
pub fn write_triplets<W: std::io::Write>(a: &SpMat, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.as_ref().val().len())?;
    for (i, j, v) in entries(a) {
        writeln!(w, "{} {} {} {}", i, j, v.re, v.im)?;
    }
    Ok(())
}

/// x^H y
pub fn dotc(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// x^H A x, real part
pub fn quad_form(a: &SpMat, x: &[c64]) -> c64 {
    dotc(x, &spmv(a, x))
}

pub fn axpy(y: &mut [c64], s: c64, x: &[c64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += s * b;
    }
}

pub fn scale_vec(x: &mut [c64], s: c64) {
    x.iter_mut().for_each(|z| *z *= s);
}

pub fn zeros(n: usize) -> Vec<c64> {
    vec![c64::new(0.0, 0.0); n]
}

pub fn cis(t: f64) -> c64 {
    c64::new(t.cos(), t.sin())
}
