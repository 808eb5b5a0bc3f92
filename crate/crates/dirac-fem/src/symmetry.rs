//! Rotation and inversion-conjugation acting on periodic parts at K.
//!
//! With Phi = e^{iK.x} phi, the rotation (R Phi)(x) = Phi(y), y = x_c + R*(x - x_c),
//! has periodic part e^{-iK.x} e^{iK.y} phi(y0), where y = y0 + v folds y into
//! the cell. On a DOF at x_n this is phase_n * phi[perm(n)] with
//! phase_n = e^{iK.(y_n - x_n)}, y_n taken before folding. For the
//! antiunitary map (PC Phi)(x) = conj(Phi(2x_c - x)) the same computation
//! gives phase_n = e^{-iK.(x_n + y_n)} = e^{-2iK.x_c}, a constant.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{add, dot, sub, LatticeBasis, PointGroupData, Vec2};
use crate::linalg::{cis, dotc, spmv, SpMat};
use crate::mesh::{DofMap, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionKind {
    Rotation,
    Inversion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryAction {
    pub perm: Vec<usize>,
    pub phase: Vec<c64>,
    pub kind: ActionKind,
    pub conjugating: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    One,
    Tau,
    TauBar,
    Mixed,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::One => "one",
            Label::Tau => "tau",
            Label::TauBar => "tau_bar",
            Label::Mixed => "mixed",
        }
    }

    pub fn eigenvalue(self) -> Option<c64> {
        let tau = PointGroupData::honeycomb().tau;
        match self {
            Label::One => Some(c64::new(1.0, 0.0)),
            Label::Tau => Some(tau),
            Label::TauBar => Some(tau.conj()),
            Label::Mixed => None,
        }
    }
}

pub const CLASSIFY_TOL: f64 = 0.05;

fn build(mesh: &Mesh, k: Vec2, maps: &[DofMap], kind: ActionKind) -> Result<SymmetryAction> {
    if maps.len() != mesh.n_dofs() {
        return Err(Error::Symmetry("mesh carries no point-group maps".into()));
    }
    let basis = LatticeBasis::honeycomb();
    let mut perm = Vec::with_capacity(maps.len());
    let mut phase = Vec::with_capacity(maps.len());
    for (d, m) in maps.iter().enumerate() {
        let x = mesh.dof_position(d);
        let y = add(
            mesh.dof_position(m.target),
            basis.lattice_vec([m.shift[0] as f64, m.shift[1] as f64]),
        );
        perm.push(m.target);
        phase.push(match kind {
            ActionKind::Rotation => cis(dot(k, sub(y, x))),
            ActionKind::Inversion => cis(-dot(k, add(x, y))),
        });
    }
    Ok(SymmetryAction {
        perm,
        phase,
        kind,
        conjugating: kind == ActionKind::Inversion,
    })
}

pub fn build_rotation_action(mesh: &Mesh, k: Vec2) -> Result<SymmetryAction> {
    let a = build(mesh, k, &mesh.rot_action, ActionKind::Rotation)?;
    check_geometry(mesh, &a, |x| PointGroupData::honeycomb().rotate(x))?;
    Ok(a)
}

pub fn build_pc_action(mesh: &Mesh, k: Vec2) -> Result<SymmetryAction> {
    let a = build(mesh, k, &mesh.inv_action, ActionKind::Inversion)?;
    check_geometry(mesh, &a, |x| PointGroupData::honeycomb().invert(x))?;
    Ok(a)
}

fn check_geometry(mesh: &Mesh, a: &SymmetryAction, f: impl Fn(Vec2) -> Vec2) -> Result<()> {
    let basis = LatticeBasis::honeycomb();
    for (d, &t) in a.perm.iter().enumerate() {
        let (y0, _) = basis.reduce(f(mesh.dof_position(d)));
        let (z0, _) = basis.reduce(mesh.dof_position(t));
        if crate::lattice::norm(sub(y0, z0)) > 1e-10 {
            return Err(Error::Symmetry(format!("dof {d} maps off the mesh by more than 1e-10")));
        }
    }
    Ok(())
}

impl SymmetryAction {
    pub fn apply(&self, u: &[c64]) -> Vec<c64> {
        self.perm
            .iter()
            .zip(&self.phase)
            .map(|(&p, &ph)| if self.conjugating { ph * u[p].conj() } else { ph * u[p] })
            .collect()
    }

    pub fn apply_n(&self, u: &[c64], times: usize) -> Vec<c64> {
        let mut v = u.to_vec();
        for _ in 0..times {
            v = self.apply(&v);
        }
        v
    }
}

/// M-inner product <x, y>_M = y^H M x.
pub fn inner_m(m: &SpMat, x: &[c64], y: &[c64]) -> c64 {
    dotc(y, &spmv(m, x))
}

pub fn norm_m(m: &SpMat, x: &[c64]) -> f64 {
    inner_m(m, x, x).re.max(0.0).sqrt()
}

/// mu = <R u, u>_M / <u, u>_M and the nearest label.
pub fn classify(u: &[c64], rot: &SymmetryAction, m: &SpMat) -> (Label, c64) {
    let ru = rot.apply(u);
    let mu = inner_m(m, &ru, u) / inner_m(m, u, u).re;
    let mut best = (Label::Mixed, f64::INFINITY);
    for l in [Label::One, Label::Tau, Label::TauBar] {
        let d = (mu - l.eigenvalue().unwrap()).norm();
        if d < best.1 {
            best = (l, d);
        }
    }
    if best.1 < CLASSIFY_TOL {
        (best.0, mu)
    } else {
        (Label::Mixed, mu)
    }
}

/// (1/3) sum_m conj(nu)^m R^m u
pub fn projector(u: &[c64], rot: &SymmetryAction, nu: c64) -> Vec<c64> {
    let mut acc = u.to_vec();
    let mut cur = u.to_vec();
    let mut c = c64::new(1.0, 0.0);
    for _ in 1..3 {
        cur = rot.apply(&cur);
        c *= nu.conj();
        for (a, b) in acc.iter_mut().zip(&cur) {
            *a += c * b;
        }
    }
    acc.iter_mut().for_each(|a| *a /= 3.0);
    acc
}

/// M-normalized component of `label` within the span of `cluster`; the
/// component of largest norm is returned with its pre-normalization norm.
pub fn project_symmetry(cluster: &[Vec<c64>], rot: &SymmetryAction, m: &SpMat, label: Label) -> Result<(Vec<c64>, f64)> {
    let nu = label
        .eigenvalue()
        .ok_or_else(|| Error::Invalid("cannot project onto the mixed label".into()))?;
    let mut best: Option<(Vec<c64>, f64)> = None;
    for u in cluster {
        let p = projector(u, rot, nu);
        let nrm = norm_m(m, &p);
        if best.as_ref().is_none_or(|b| nrm > b.1) {
            best = Some((p, nrm));
        }
    }
    let (mut p, nrm) = best.ok_or_else(|| Error::Invalid("empty cluster".into()))?;
    if nrm < 1e-6 {
        return Err(Error::Symmetry(format!(
            "cluster has no {} component (norm {nrm:e})",
            label.as_str()
        )));
    }
    p.iter_mut().for_each(|x| *x /= nrm);
    Ok((p, nrm))
}

/// max_i ||A R u_i - R A u_i|| / (||A||_inf ||u_i||) over the given vectors.
pub fn commutation_residual(a: &SpMat, rot: &SymmetryAction, vectors: &[Vec<c64>]) -> f64 {
    let scale = crate::linalg::norm_inf(a);
    vectors
        .iter()
        .map(|u| {
            let lhs = spmv(a, &rot.apply(u));
            let rhs = rot.apply(&spmv(a, u));
            let d: Vec<c64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
            crate::linalg::norm2(&d) / (scale * crate::linalg::norm2(u))
        })
        .fold(0.0, f64::max)
}
