//! High-contrast expansion of the Dirac eigenpair at K to first order.
//!
//! Write A_g = A+ + g A- with A+ the inclusion stiffness and A- the bulk
//! stiffness at sigma = 1. Let I be the inclusion-interior DOFs and B the
//! rest. With u0 the inclusion Dirichlet eigenvector (eigenvalue delta)
//! and f = [(A+ - delta M) u0]_B, matching powers of 1/g in
//! (A_g - lambda M) u = 0 gives
//!
//!   A-_BB c = -f,             lambda1 = f^H c = -c^H A- c < 0,
//!
//! and at the next order an interior correction w, orthogonal to the
//! Dirichlet eigenspace, and a bulk field c2:
//!
//!   [(A+ - delta M)(c + w) - lambda1 M u0]_I = 0,
//!   A-_BB c2 = -[(A+ - delta M)(c + w) - lambda1 M u0]_B.
//!
//! u0 + c/g is then a quasi-mode for delta with residual O(1/g), and
//! u0 + (c + w)/g + c2/g^2 one for delta + lambda1/g with residual O(1/g^2).

use faer::c64;
use faer::sparse::Triplet;
use serde::{Deserialize, Serialize};

use crate::bands::MeshProvenance;
use crate::bessel::radial_entry;
use crate::dirac::{dirac_state_at, k_point};
use crate::eigen::{solve_gep_with, EigenOptions, Factor};
use crate::error::{Error, Result};
use crate::fem::{assemble_bloch, assemble_inclusion_dirichlet_at, assemble_split, integrate_pair, SplitForms};
use crate::fit::loglog_slope;
use crate::lattice::{QuasiMomentum, Vec2};
use crate::linalg::{add_scaled, dotc, entries, from_triplets, quad_form, spmv, submatrix, zeros, SpMat};
use crate::mesh::{Mesh, NodeClass, Region};
use crate::par::prelude::*;

#[derive(Debug, Clone)]
pub struct Orbital {
    pub q: usize,
    pub k: Vec2,
    /// Discrete eigenvalue of the inclusion Dirichlet problem.
    pub delta: f64,
    /// Bessel value (z_{0,q} / R0)^2.
    pub delta_exact: f64,
    /// Periodic parts on all DOFs, zero off the inclusion interiors,
    /// M-normalized, with real positive mean of e^{ik.x} p.
    pub p_a: Vec<c64>,
    pub p_b: Vec<c64>,
}

fn inclusion_mode(mesh: &Mesh, region: Region, k: Vec2, index: usize) -> Result<(f64, Vec<c64>)> {
    let inc = assemble_inclusion_dirichlet_at(mesh, region, k)?;
    let nev = (index + 1).min(inc.n());
    let sol = solve_gep_with(&inc.a, &inc.m, &EigenOptions::with_nev(nev))?;
    let l: Vec<f64> = sol.pairs.iter().map(|p| p.lambda).collect();
    let lam = l[index - 1];
    let isolated = |j: usize| (l[j] - lam).abs() > 1e-6 * lam;
    if (index >= 2 && !isolated(index - 2)) || (index < l.len() && !isolated(index)) {
        return Err(Error::Numerical(format!(
            "discrete Dirichlet eigenvalue {index} ({lam}) is not simple on this mesh"
        )));
    }
    let mut p = inc.expand(&sol.pairs[index - 1].vector, mesh.n_dofs());
    let w = [
        (region == Region::InclusionA).then_some(1.0),
        (region == Region::InclusionB).then_some(1.0),
        None,
    ];
    let mean = integrate_pair(mesh, k, &p, &p, w, |u, _, _, _| u);
    if mean.norm() < 1e-12 {
        return Err(Error::Numerical("orbital has zero mean".into()));
    }
    let ph = mean.conj() / mean.norm();
    p.iter_mut().for_each(|x| *x *= ph);
    Ok((lam, p))
}

/// Dirichlet orbitals for the q-th radial (J0) mode.
pub fn build_orbital(mesh: &Mesh, k: Vec2, q: usize) -> Result<Orbital> {
    let entry = radial_entry(mesh.geometry.r0, q)?;
    if !entry.satisfies_s {
        return Err(Error::Invalid(format!("mode (0, {q}) violates condition (S)")));
    }
    let (delta, p_a) = inclusion_mode(mesh, Region::InclusionA, k, entry.first_index)?;
    let (_, p_b) = inclusion_mode(mesh, Region::InclusionB, k, entry.first_index)?;
    Ok(Orbital {
        q,
        k,
        delta,
        delta_exact: entry.value,
        p_a,
        p_b,
    })
}

/// Selection of I (inclusion interiors) and B (interface and bulk).
fn interior_dofs(mesh: &Mesh) -> Vec<usize> {
    mesh.dof_classes()
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c, NodeClass::InteriorA | NodeClass::InteriorB))
        .map(|(i, _)| i)
        .collect()
}

fn gather(x: &[c64], idx: &[usize]) -> Vec<c64> {
    idx.iter().map(|&i| x[i]).collect()
}

fn scatter(x: &[c64], idx: &[usize], n: usize) -> Vec<c64> {
    let mut out = zeros(n);
    for (v, &i) in x.iter().zip(idx) {
        out[i] = *v;
    }
    out
}

/// (A+ - delta M) x
fn shifted_apply(s: &SplitForms, delta: f64, x: &[c64]) -> Vec<c64> {
    let a = spmv(&s.a_plus, x);
    let m = spmv(&s.m, x);
    a.iter().zip(&m).map(|(p, q)| p - q * delta).collect()
}

#[derive(Debug, Clone)]
pub struct Corrector {
    pub bulk: Vec<usize>,
    /// Load f on the bulk DOFs.
    pub rhs: Vec<c64>,
    /// Bulk field on all DOFs, zero on the inclusion interiors.
    pub field: Vec<c64>,
    pub lambda1: f64,
    /// f^H c, the Neumann-trace form of lambda1.
    pub lambda1_trace: f64,
}

pub fn solve_corrector(mesh: &Mesh, orb: &Orbital) -> Result<Corrector> {
    let split = assemble_split(mesh, orb.k)?;
    solve_corrector_with(mesh, orb, &split)
}

fn bulk_factor(split: &SplitForms, bulk: &[usize]) -> Result<Factor> {
    let abb = submatrix(&split.a_minus, bulk, bulk)?;
    Factor::of(&abb, false).map_err(|msg| Error::Factorization {
        shift: 0.0,
        msg: format!("bulk operator is singular (k = 0?): {msg}"),
    })
}

fn solve_corrector_with(mesh: &Mesh, orb: &Orbital, split: &SplitForms) -> Result<Corrector> {
    if orb.k[0].hypot(orb.k[1]) < 1e-12 {
        return Err(Error::Invalid("corrector problem is singular at k = 0".into()));
    }
    let (bulk, f) = crate::fem::corrector_rhs(mesh, QuasiMomentum { k: orb.k }, &orb.p_a, orb.delta)?;
    let fac = bulk_factor(split, &bulk)?;
    let neg: Vec<c64> = f.iter().map(|x| -x).collect();
    let cb = fac.solve(&neg);
    let field = scatter(&cb, &bulk, mesh.n_dofs());
    let lambda1 = -quad_form(&split.a_minus, &field).re;
    let lambda1_trace = dotc(&f, &cb).re;
    Ok(Corrector {
        bulk,
        rhs: f,
        field,
        lambda1,
        lambda1_trace,
    })
}

/// -integral over the bulk of |(grad + iK) Phi1|^2 for a corrector field.
pub fn lambda1_coeff(mesh: &Mesh, k: Vec2, corrector: &[c64]) -> Result<f64> {
    let split = assemble_split(mesh, k)?;
    Ok(-quad_form(&split.a_minus, corrector).re)
}

/// Terms of the first- and second-order quasi-modes.
#[derive(Debug, Clone)]
pub struct QuasiModeTerms {
    pub u0: Vec<c64>,
    pub c: Vec<c64>,
    pub w: Vec<c64>,
    pub c2: Vec<c64>,
    pub delta: f64,
    pub lambda1: f64,
}

pub fn quasimode_terms(mesh: &Mesh, orb: &Orbital) -> Result<(Corrector, QuasiModeTerms)> {
    let split = assemble_split(mesh, orb.k)?;
    let cor = solve_corrector_with(mesh, orb, &split)?;
    let n = mesh.n_dofs();
    let interior = interior_dofs(mesh);
    let ni = interior.len();
    let u0 = &orb.p_a;
    let lam1 = cor.lambda1;

    // Interior correction w from a bordered system, orthogonal to both orbitals.
    let mu0: Vec<c64> = spmv(&split.m, u0);
    let sc = shifted_apply(&split, orb.delta, &cor.field);
    let g1: Vec<c64> = sc.iter().zip(&mu0).map(|(a, b)| a - b * lam1).collect();
    let shifted = add_scaled(&split.a_plus, c64::new(-orb.delta, 0.0), &split.m)?;
    let aii = submatrix(&shifted, &interior, &interior)?;
    let mut t: Vec<Triplet<usize, usize, c64>> = entries(&aii).into_iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    for (col, p) in [&orb.p_a, &orb.p_b].into_iter().enumerate() {
        let mp = gather(&spmv(&split.m, p), &interior);
        for (i, v) in mp.iter().enumerate() {
            if v.norm() > 0.0 {
                t.push(Triplet::new(i, ni + col, *v));
                t.push(Triplet::new(ni + col, i, v.conj()));
            }
        }
    }
    let bordered = from_triplets(ni + 2, ni + 2, &t)?;
    let fac = Factor::of(&bordered, true).map_err(|msg| Error::Factorization { shift: orb.delta, msg })?;
    let mut rhs: Vec<c64> = gather(&g1, &interior).iter().map(|x| -x).collect();
    rhs.extend([c64::new(0.0, 0.0); 2]);
    let sol = fac.solve(&rhs);
    let w = scatter(&sol[..ni], &interior, n);

    let cw: Vec<c64> = cor.field.iter().zip(&w).map(|(a, b)| a + b).collect();
    let s2 = shifted_apply(&split, orb.delta, &cw);
    let g2: Vec<c64> = s2.iter().zip(&mu0).map(|(a, b)| -(a - b * lam1)).collect();
    let bfac = bulk_factor(&split, &cor.bulk)?;
    let c2 = scatter(&bfac.solve(&gather(&g2, &cor.bulk)), &cor.bulk, n);
    let terms = QuasiModeTerms {
        u0: u0.clone(),
        c: cor.field.clone(),
        w,
        c2,
        delta: orb.delta,
        lambda1: lam1,
    };
    Ok((cor, terms))
}

impl QuasiModeTerms {
    /// Quasi-mode of order `m` (0 or 1) at contrast g and its eigenvalue.
    pub fn quasimode(&self, g: f64, m: usize) -> (Vec<c64>, f64) {
        let ig = 1.0 / g;
        match m {
            0 => (
                self.u0.iter().zip(&self.c).map(|(a, b)| a + b * ig).collect(),
                self.delta,
            ),
            _ => (
                (0..self.u0.len())
                    .map(|i| self.u0[i] + (self.c[i] + self.w[i]) * ig + self.c2[i] * (ig * ig))
                    .collect(),
                self.delta + self.lambda1 * ig,
            ),
        }
    }
}

/// sqrt(r^H A_g^{-1} r) for r = A_g u - lambda M u at quasimomentum k.
pub fn quasimode_residual(mesh: &Mesh, k: Vec2, g: f64, u: &[c64], lambda: f64) -> Result<f64> {
    let ops = assemble_bloch(mesh, g, QuasiMomentum { k })?;
    let au = spmv(&ops.a, u);
    let mu = spmv(&ops.m, u);
    let r: Vec<c64> = au.iter().zip(&mu).map(|(a, b)| a - b * lambda).collect();
    let fac = Factor::of(&ops.a, false).map_err(|msg| Error::Factorization { shift: 0.0, msg })?;
    let z = fac.solve(&r);
    Ok(dotc(&r, &z).re.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRow {
    pub g: f64,
    pub lambda_d: f64,
    pub prediction_m0: f64,
    pub prediction_m1: f64,
    pub residual_m0: f64,
    pub residual_m1: f64,
    pub eta_m0: f64,
    pub eta_m1: f64,
    pub l2_dev: f64,
    pub h1_dev: f64,
    /// Same deviations for Phi2 against the B orbital.
    pub l2_dev_b: f64,
    pub h1_dev_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsStudy {
    pub q: usize,
    pub delta: f64,
    pub delta_exact: f64,
    pub lambda1: f64,
    pub lambda1_trace: f64,
    pub rows: Vec<AsymptoticsRow>,
    pub slope_residual_m0: f64,
    pub slope_residual_m1: f64,
    pub slope_eta_m0: f64,
    pub slope_eta_m1: f64,
    pub slope_l2: f64,
    pub slope_h1: f64,
    /// Phase c with PC pA = c pB, read off the eigenfunctions at the largest g
    /// as the product of the phases aligning Phi1 to pA and Phi2 to pB.
    /// Independent of the arbitrary phase of Phi1.
    pub pc_phase: [f64; 2],
    pub provenance: MeshProvenance,
}

/// ||x - e^{i t} y|| minimized over t, in the M and H1 norms; the optimal phase is returned.
fn aligned_dev(x: &[c64], y: &[c64], m: &SpMat, h1: &SpMat) -> (f64, f64, c64) {
    // y^H M x
    let a = dotc(y, &spmv(m, x));
    let ph = if a.norm() > 0.0 { a / a.norm() } else { c64::new(1.0, 0.0) };
    let d: Vec<c64> = x.iter().zip(y).map(|(p, q)| p - q * ph).collect();
    (quad_form(m, &d).re.max(0.0).sqrt(), quad_form(h1, &d).re.max(0.0).sqrt(), ph)
}

/// Expansion, quasi-mode and eigenfunction studies for the lowest radial mode pair at K.
pub fn asymptotics_study(mesh: &Mesh, q: usize, g_list: &[f64]) -> Result<AsymptoticsStudy> {
    if g_list.len() < 2 {
        return Err(Error::Invalid("g_list needs >= 2 entries".into()));
    }
    let k = k_point();
    let orb = build_orbital(mesh, k, q)?;
    let (cor, terms) = quasimode_terms(mesh, &orb)?;
    let split = assemble_split(mesh, k)?;
    // H1_K norm: full stiffness at sigma = 1 plus mass.
    let h1 = add_scaled(&add_scaled(&split.a_plus, c64::new(1.0, 0.0), &split.a_minus)?, c64::new(1.0, 0.0), &split.m)?;
    // Each disc mode below delta_q appears once per inclusion.
    let n = 2 * radial_entry(mesh.geometry.r0, q)?.first_index - 1;
    let rows: Vec<(AsymptoticsRow, c64)> = g_list
        .par_iter()
        .map(|&g| {
            let st = dirac_state_at(mesh, g, n)?;
            let lambda_d = st.lambda_d;
            let p0 = orb.delta;
            let p1 = orb.delta + cor.lambda1 / g;
            let (u0, l0) = terms.quasimode(g, 0);
            let (u1, l1) = terms.quasimode(g, 1);
            let eta_m0 = quasimode_residual(mesh, k, g, &u0, l0)?;
            let eta_m1 = quasimode_residual(mesh, k, g, &u1, l1)?;
            let (l2_dev, h1_dev, ph_a) = aligned_dev(&st.phi1, &orb.p_a, &split.m, &h1);
            let (l2_dev_b, h1_dev_b, ph_b) = aligned_dev(&st.phi2, &orb.p_b, &split.m, &h1);
            Ok((
                AsymptoticsRow {
                    g,
                    lambda_d,
                    prediction_m0: p0,
                    prediction_m1: p1,
                    residual_m0: (lambda_d - p0).abs(),
                    residual_m1: (lambda_d - p1).abs(),
                    eta_m0,
                    eta_m1,
                    l2_dev,
                    h1_dev,
                    l2_dev_b,
                    h1_dev_b,
                },
                ph_a * ph_b,
            ))
        })
        .collect::<Result<_>>()?;
    let pc_phase = rows.last().map(|r| [r.1.re, r.1.im]).unwrap_or([1.0, 0.0]);
    let rows: Vec<AsymptoticsRow> = rows.into_iter().map(|r| r.0).collect();
    let gs: Vec<f64> = rows.iter().map(|r| r.g).collect();
    let col = |f: fn(&AsymptoticsRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    Ok(AsymptoticsStudy {
        q,
        delta: orb.delta,
        delta_exact: orb.delta_exact,
        lambda1: cor.lambda1,
        lambda1_trace: cor.lambda1_trace,
        slope_residual_m0: loglog_slope(&gs, &col(|r| r.residual_m0))?,
        slope_residual_m1: loglog_slope(&gs, &col(|r| r.residual_m1))?,
        slope_eta_m0: loglog_slope(&gs, &col(|r| r.eta_m0))?,
        slope_eta_m1: loglog_slope(&gs, &col(|r| r.eta_m1))?,
        slope_l2: loglog_slope(&gs, &col(|r| r.l2_dev))?,
        slope_h1: loglog_slope(&gs, &col(|r| r.h1_dev))?,
        pc_phase,
        rows,
        provenance: MeshProvenance::of(mesh),
    })
}
