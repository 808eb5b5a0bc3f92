//! Smallest eigenpairs of the Hermitian pencil A x = lambda M x.
//!
//! Small problems go through a dense reduction. Larger ones use a block
//! subspace method with an exact shift-invert expansion: the search space
//! is grown by (A - sigma M)^{-1} applied to the residuals of the leading
//! unconverged Ritz vectors, kept M-orthonormal by two passes of classical Gram-Schmidt, and
//! the Ritz values are taken from V^H A V.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::{c64, Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add_scaled, entries, hermitian_defect, max_abs, norm2, spmv, SpMat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// M-normalized.
    pub vector: Vec<c64>,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub nev: usize,
    /// Relative residual ||A x - lambda M x|| / (max(|lambda|, lambda_nev) ||M x||).
    pub tol: f64,
    /// Shift for the factorization; `None` picks one below the spectrum.
    pub shift: Option<f64>,
    pub block: usize,
    pub max_dim: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub dense_threshold: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            nev: 6,
            tol: 1e-9,
            shift: None,
            block: 3,
            max_dim: 120,
            max_iter: 400,
            seed: 0x5eed_0001,
            dense_threshold: 400,
        }
    }
}

impl EigenOptions {
    pub fn with_nev(nev: usize) -> Self {
        Self {
            nev,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub pairs: Vec<EigenPair>,
    pub shift: f64,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// The `nev` smallest eigenpairs with default options and relative tolerance `tol`.
pub fn solve_gep(a: &SpMat, m: &SpMat, nev: usize, tol: f64) -> Result<Vec<EigenPair>> {
    let opts = EigenOptions {
        nev,
        tol,
        ..EigenOptions::default()
    };
    Ok(solve_gep_with(a, m, &opts)?.pairs)
}

pub fn solve_gep_with(a: &SpMat, m: &SpMat, opts: &EigenOptions) -> Result<EigenSolution> {
    let n = a.nrows();
    if a.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::Invalid("A and M must be square of equal size".into()));
    }
    if opts.nev == 0 || opts.nev > n {
        return Err(Error::Invalid(format!("nev must be in 1..={n}, got {}", opts.nev)));
    }
    let scale = max_abs(a);
    let defect = hermitian_defect(a);
    if defect > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Invalid(format!(
            "A is not Hermitian: max |A - A^H| = {defect:e}, max |A| = {scale:e}"
        )));
    }
    let mdef = hermitian_defect(m);
    if mdef > 1e-10 * max_abs(m) {
        return Err(Error::Invalid(format!("M is not Hermitian: defect {mdef:e}")));
    }
    if n <= opts.dense_threshold {
        return dense_solve(a, m, opts);
    }
    sparse_solve(a, m, opts)
}

fn to_dense(a: &SpMat) -> Mat<c64> {
    let n = a.nrows();
    let mut d = Mat::<c64>::zeros(n, a.ncols());
    for (i, j, v) in entries(a) {
        d[(i, j)] += v;
    }
    d
}

fn hermitize(h: &Mat<c64>) -> Mat<c64> {
    let n = h.nrows();
    Mat::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5)
}

fn dense_solve(a: &SpMat, m: &SpMat, opts: &EigenOptions) -> Result<EigenSolution> {
    let n = a.nrows();
    let ad = hermitize(&to_dense(a));
    let md = hermitize(&to_dense(m));
    let em = md
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("dense eigen of M failed: {e:?}")))?;
    let s = em.S();
    let u = em.U();
    let mut smin = f64::INFINITY;
    for i in 0..n {
        smin = smin.min(s[i].re);
    }
    if !(smin > 0.0) {
        return Err(Error::Factorization {
            shift: 0.0,
            msg: "M is not positive definite".into(),
        });
    }
    let w = Mat::from_fn(n, n, |i, j| u[(i, j)] * (1.0 / s[j].re.sqrt()));
    // M^{-1/2} = U S^{-1/2} U^H
    let minv_half = &w * u.adjoint();
    let c = hermitize(&(&minv_half * &ad * &minv_half));
    let ec = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("dense eigen failed: {e:?}")))?;
    let x = &minv_half * ec.U();
    let mut pairs = Vec::with_capacity(opts.nev);
    for j in 0..opts.nev {
        let v: Vec<c64> = (0..n).map(|i| x[(i, j)]).collect();
        pairs.push(EigenPair {
            lambda: ec.S()[j].re,
            vector: v,
        });
    }
    let residuals = residuals(a, m, &pairs);
    Ok(EigenSolution {
        pairs,
        shift: 0.0,
        iterations: 0,
        residuals,
    })
}

/// Relative residuals of a set of pairs, scaled by the largest |lambda|.
pub fn residuals(a: &SpMat, m: &SpMat, pairs: &[EigenPair]) -> Vec<f64> {
    let top = pairs.iter().map(|p| p.lambda.abs()).fold(0.0, f64::max);
    pairs
        .iter()
        .map(|p| {
            let ax = spmv(a, &p.vector);
            let mx = spmv(m, &p.vector);
            let r: Vec<c64> = ax.iter().zip(&mx).map(|(x, y)| x - y * p.lambda).collect();
            norm2(&r) / (p.lambda.abs().max(top).max(f64::MIN_POSITIVE) * norm2(&mx))
        })
        .collect()
}

pub enum Factor {
    Cholesky(Llt<usize, c64>),
    Lu(Box<Lu<usize, c64>>),
}

impl Factor {
    /// Factor A - sigma M. Cholesky is tried first unless `indefinite`.
    pub fn new(a: &SpMat, m: &SpMat, sigma: f64, indefinite: bool) -> Result<Self> {
        let f = add_scaled(a, c64::new(-sigma, 0.0), m)?;
        Self::of(&f, indefinite).map_err(|msg| Error::Factorization { shift: sigma, msg })
    }

    pub fn of(f: &SpMat, indefinite: bool) -> std::result::Result<Self, String> {
        if !indefinite {
            if let Ok(l) = f.sp_cholesky(Side::Lower) {
                return Ok(Factor::Cholesky(l));
            }
        }
        f.sp_lu().map(|l| Factor::Lu(Box::new(l))).map_err(|e| format!("{e:?}"))
    }

    pub fn solve_in_place(&self, rhs: &mut Mat<c64>) {
        match self {
            Factor::Cholesky(l) => l.solve_in_place(rhs.as_mut()),
            Factor::Lu(l) => l.solve_in_place(rhs.as_mut()),
        }
    }

    pub fn solve(&self, b: &[c64]) -> Vec<c64> {
        let mut r = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        self.solve_in_place(&mut r);
        (0..b.len()).map(|i| r[(i, 0)]).collect()
    }
}

/// Default shift: a tiny negative multiple of the mean of A_ii / M_ii.
pub fn default_shift(a: &SpMat, m: &SpMat) -> f64 {
    let n = a.nrows();
    let mut da = vec![0.0; n];
    let mut dm = vec![0.0; n];
    for (i, j, v) in entries(a) {
        if i == j {
            da[i] += v.re;
        }
    }
    for (i, j, v) in entries(m) {
        if i == j {
            dm[i] += v.re;
        }
    }
    let tr: f64 = da.iter().zip(&dm).map(|(a, m)| a / m).sum::<f64>() / n as f64;
    -1e-6 * tr.max(1.0)
}

struct Basis {
    v: Vec<Vec<c64>>,
    av: Vec<Vec<c64>>,
    mv: Vec<Vec<c64>>,
}

fn dotc(x: &[c64], y: &[c64]) -> c64 {
    let mut s = c64::new(0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        s += a.conj() * b;
    }
    s
}

fn combine(vs: &[Vec<c64>], y: &Mat<c64>, col: usize) -> Vec<c64> {
    let n = vs[0].len();
    let mut out = vec![c64::new(0.0, 0.0); n];
    for (j, v) in vs.iter().enumerate() {
        let c = y[(j, col)];
        if c == c64::new(0.0, 0.0) {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

fn sparse_solve(a: &SpMat, m: &SpMat, opts: &EigenOptions) -> Result<EigenSolution> {
    let n = a.nrows();
    let nev = opts.nev;
    let b = opts.block.max(1);
    let max_dim = opts.max_dim.max(2 * (nev + b)).min(n);
    let sigma = opts.shift.unwrap_or_else(|| default_shift(a, m));
    let factor = Factor::new(a, m, sigma, opts.shift.is_some())?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<Vec<c64>> = (0..b.max(nev.min(6)))
        .map(|_| (0..n).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect())
        .collect();
    let mut basis = Basis {
        v: Vec::new(),
        av: Vec::new(),
        mv: Vec::new(),
    };

    let apply = |block: &[Vec<c64>]| -> Vec<Vec<c64>> {
        let mut rhs = Mat::<c64>::zeros(n, block.len());
        for (j, x) in block.iter().enumerate() {
            let mx = spmv(m, x);
            for i in 0..n {
                rhs[(i, j)] = mx[i];
            }
        }
        factor.solve_in_place(&mut rhs);
        (0..block.len()).map(|j| (0..n).map(|i| rhs[(i, j)]).collect()).collect()
    };

    let mut new_block = apply(&start);
    start.clear();
    let mut h: Vec<Vec<c64>> = Vec::new();
    let mut last_res = vec![f64::INFINITY; nev];
    for iter in 0..opts.max_iter {
        let mut added = 0;
        for mut w in new_block.drain(..) {
            let before = norm_m(m, &w);
            if !(before > 0.0) {
                continue;
            }
            for _ in 0..2 {
                for j in 0..basis.v.len() {
                    let c = dotc(&basis.mv[j], &w);
                    for (x, y) in w.iter_mut().zip(&basis.v[j]) {
                        *x -= c * y;
                    }
                }
            }
            let mw = spmv(m, &w);
            let nrm = dotc(&w, &mw).re.max(0.0).sqrt();
            if nrm < 1e-13 * before {
                continue;
            }
            let inv = 1.0 / nrm;
            w.iter_mut().for_each(|x| *x *= inv);
            let mw: Vec<c64> = mw.into_iter().map(|x| x * inv).collect();
            let aw = spmv(a, &w);
            let row: Vec<c64> = basis.v.iter().map(|v| dotc(v, &aw)).collect();
            for (hj, r) in h.iter_mut().zip(&row) {
                hj.push(*r);
            }
            let mut newrow: Vec<c64> = row.iter().map(|r| r.conj()).collect();
            newrow.push(c64::new(dotc(&w, &aw).re, 0.0));
            h.push(newrow);
            basis.v.push(w);
            basis.av.push(aw);
            basis.mv.push(mw);
            added += 1;
        }
        let dim = basis.v.len();
        if dim == 0 {
            return Err(Error::NoConvergence("empty search space".into()));
        }
        let hm = hermitize(&Mat::from_fn(dim, dim, |i, j| h[i][j]));
        let eh = hm
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("projected eigenproblem failed: {e:?}")))?;
        let theta: Vec<f64> = (0..dim).map(|i| eh.S()[i].re).collect();
        let y = eh.U().to_owned();
        if dim < nev + b.min(n - nev) && added > 0 && dim < n {
            new_block = (0..b.min(dim)).map(|j| combine(&basis.v, &y, j)).collect();
            new_block = apply(&new_block);
            continue;
        }
        let k = nev.min(dim);
        // When every wanted value is ~0 (lambda_1 at k = 0 with nev = 1) the
        // scale falls back to the top of the search space.
        let top = theta[k - 1].abs().max(1e-3 * theta[dim - 1].abs());
        let mut res = Vec::with_capacity(k);
        for j in 0..k {
            let ax = combine(&basis.av, &y, j);
            let mx = combine(&basis.mv, &y, j);
            let r: Vec<c64> = ax.iter().zip(&mx).map(|(p, q)| p - q * theta[j]).collect();
            res.push(norm2(&r) / (theta[j].abs().max(top).max(f64::MIN_POSITIVE) * norm2(&mx)));
        }
        let done = k == nev && res.iter().all(|&r| r <= opts.tol);
        if done || dim >= n {
            let pairs: Vec<EigenPair> = (0..k)
                .map(|j| EigenPair {
                    lambda: theta[j],
                    vector: combine(&basis.v, &y, j),
                })
                .collect();
            return Ok(EigenSolution {
                pairs,
                shift: sigma,
                iterations: iter + 1,
                residuals: res,
            });
        }
        if added == 0 && res.iter().zip(&last_res).all(|(r, l)| r >= l) {
            return Err(Error::NoConvergence(format!(
                "search space stagnated at dim {dim}, residuals {res:?}"
            )));
        }
        last_res = res.clone();
        let mut pick: Vec<usize> = (0..k).filter(|&j| res[j] > opts.tol).collect();
        let mut extra = k;
        while pick.len() < b && extra < dim {
            pick.push(extra);
            extra += 1;
        }
        pick.truncate(b);
        // Expanding with (A - sigma M)^{-1} r spans the same space as
        // (A - sigma M)^{-1} M x modulo x, without the cancellation.
        let ritz: Vec<Vec<c64>> = pick
            .iter()
            .map(|&j| {
                let ax = combine(&basis.av, &y, j);
                let mx = combine(&basis.mv, &y, j);
                ax.iter().zip(&mx).map(|(p, q)| p - q * theta[j]).collect()
            })
            .collect();
        if dim + pick.len() > max_dim {
            let keep = (max_dim / 2).max(nev + b).min(dim);
            let nv: Vec<Vec<c64>> = (0..keep).map(|j| combine(&basis.v, &y, j)).collect();
            let nav: Vec<Vec<c64>> = (0..keep).map(|j| combine(&basis.av, &y, j)).collect();
            let nmv: Vec<Vec<c64>> = (0..keep).map(|j| combine(&basis.mv, &y, j)).collect();
            basis = Basis { v: nv, av: nav, mv: nmv };
            h = (0..keep)
                .map(|i| {
                    (0..keep)
                        .map(|j| if i == j { c64::new(theta[i], 0.0) } else { c64::new(0.0, 0.0) })
                        .collect()
                })
                .collect();
        }
        new_block = solve_block(&factor, &ritz);
    }
    Err(Error::NoConvergence(format!(
        "no convergence after {} iterations (shift {sigma:e})",
        opts.max_iter
    )))
}

fn solve_block(factor: &Factor, block: &[Vec<c64>]) -> Vec<Vec<c64>> {
    let n = block[0].len();
    let mut rhs = Mat::from_fn(n, block.len(), |i, j| block[j][i]);
    factor.solve_in_place(&mut rhs);
    (0..block.len()).map(|j| (0..n).map(|i| rhs[(i, j)]).collect()).collect()
}

fn norm_m(m: &SpMat, w: &[c64]) -> f64 {
    dotc(w, &spmv(m, w)).re.max(0.0).sqrt()
}

/// Group indices of ascending eigenvalues into clusters whose members are
/// within `rel` of each other.
pub fn clusters(lambdas: &[f64], rel: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in lambdas.iter().enumerate() {
        if let Some(last) = out.last_mut() {
            let l0 = lambdas[*last.last().unwrap()];
            if (l - l0).abs() <= rel * l.abs().max(l0.abs()) {
                last.push(i);
                continue;
            }
        }
        out.push(vec![i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::sparse::Triplet;

    fn diag(v: &[f64]) -> SpMat {
        let t: Vec<_> = v.iter().enumerate().map(|(i, &x)| Triplet::new(i, i, c64::new(x, 0.0))).collect();
        SpMat::try_new_from_triplets(v.len(), v.len(), &t).unwrap()
    }

    #[test]
    fn diagonal_dense() {
        let p = solve_gep(&diag(&[3.0, 1.0, 2.0]), &diag(&[1.0; 3]), 2, 1e-12).unwrap();
        assert!((p[0].lambda - 1.0).abs() < 1e-13);
        assert!((p[1].lambda - 2.0).abs() < 1e-13);
    }

    #[test]
    fn diagonal_sparse_path() {
        let n = 600;
        let v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 37) % n) as f64).collect();
        let opts = EigenOptions {
            nev: 4,
            ..EigenOptions::default()
        };
        let s = solve_gep_with(&diag(&v), &diag(&vec![1.0; n]), &opts).unwrap();
        let got: Vec<f64> = s.pairs.iter().map(|p| p.lambda).collect();
        for (g, e) in got.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((g - e).abs() < 1e-10, "{got:?}");
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let t = vec![
            Triplet::new(0, 0, c64::new(1.0, 0.0)),
            Triplet::new(0, 1, c64::new(1.0, 0.0)),
            Triplet::new(1, 1, c64::new(1.0, 0.0)),
        ];
        let a = SpMat::try_new_from_triplets(2, 2, &t).unwrap();
        assert!(solve_gep(&a, &diag(&[1.0, 1.0]), 1, 1e-9).is_err());
    }

    #[test]
    fn cluster_grouping() {
        let c = clusters(&[1.0, 1.0 + 1e-12, 2.0, 3.0, 3.0], 1e-9);
        assert_eq!(c, vec![vec![0, 1], vec![2], vec![3, 4]]);
    }
}
