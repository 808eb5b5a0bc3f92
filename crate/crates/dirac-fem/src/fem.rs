//! Assembly of Bloch fiber forms, cell boundary-value variants and the
//! inclusion Dirichlet Laplacian.
//!
//! Unknowns are nodal values of the periodic part phi of a Bloch mode
//! Phi = e^{ik.x} phi. Periodic nodes are identified without phase, so the
//! sparsity pattern does not depend on k. Two element forms are provided:
//!
//! * `NodalPhase` (default): on each element the nodal values of Phi are
//!   e^{ik.x_n} phi_n at the element's own node positions, and the standard
//!   forms are applied to Phi. Element matrices pick up the factors
//!   e^{ik.(x_c - x_r)}. Lattice translations and the point group act on this
//!   space exactly, so symmetry-enforced degeneracies are exact.
//! * `Shifted`: phi is a polynomial on each element and the gradient is
//!   replaced by grad + ik, giving S + i[...] + |k|^2 M.

use faer::c64;
use faer::sparse::Triplet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dot, sub, QuasiMomentum, Vec2};
use crate::linalg::{cis, from_triplets, SpMat};
use crate::mesh::{signed_area, shape_values, Mesh, NodeClass, Region};
use crate::par::prelude::*;

/// Quadrature on the reference triangle: barycentric points and weights
/// summing to one.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

fn sym3(a: f64, w: f64, pts: &mut Vec<[f64; 3]>, ws: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[a, a, b], [a, b, a], [b, a, a]] {
        pts.push(p);
        ws.push(w);
    }
}

impl Quadrature {
    /// Exact for degree 2.
    pub fn degree2() -> Self {
        let mut p = Vec::new();
        let mut w = Vec::new();
        sym3(1.0 / 6.0, 1.0 / 3.0, &mut p, &mut w);
        Self { points: p, weights: w }
    }

    /// Six-point rule exact for degree 4.
    pub fn degree4() -> Self {
        let mut p = Vec::new();
        let mut w = Vec::new();
        sym3(0.445_948_490_915_964_9, 0.223_381_589_678_011_47, &mut p, &mut w);
        sym3(0.091_576_213_509_770_74, 0.109_951_743_655_321_87, &mut p, &mut w);
        Self { points: p, weights: w }
    }

    /// Seven-point rule exact for degree 5.
    pub fn degree5() -> Self {
        let s15 = 15f64.sqrt();
        let mut p = vec![[1.0 / 3.0; 3]];
        let mut w = vec![9.0 / 40.0];
        sym3((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0, &mut p, &mut w);
        sym3((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0, &mut p, &mut w);
        Self { points: p, weights: w }
    }

    pub fn for_order(order: usize) -> Self {
        if order == 2 {
            Self::degree4()
        } else {
            Self::degree2()
        }
    }
}

/// Gradients of the shape functions at barycentric point `l`.
pub fn shape_grads(order: usize, l: [f64; 3], dl: &[Vec2; 3]) -> Vec<Vec2> {
    if order == 1 {
        return dl.to_vec();
    }
    let mut g = Vec::with_capacity(6);
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        g.push([s * dl[i][0], s * dl[i][1]]);
    }
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        g.push([
            4.0 * (l[i] * dl[j][0] + l[j] * dl[i][0]),
            4.0 * (l[i] * dl[j][1] + l[j] * dl[i][1]),
        ]);
    }
    g
}

/// Area and barycentric gradients of a straight triangle.
pub fn bary_gradients(v: &[Vec2; 3]) -> (f64, [Vec2; 3]) {
    let a = signed_area(v[0], v[1], v[2]);
    let inv = 1.0 / (2.0 * a);
    let dl = [
        [(v[1][1] - v[2][1]) * inv, (v[2][0] - v[1][0]) * inv],
        [(v[2][1] - v[0][1]) * inv, (v[0][0] - v[2][0]) * inv],
        [(v[0][1] - v[1][1]) * inv, (v[1][0] - v[0][0]) * inv],
    ];
    (a, dl)
}

/// Real element stiffness and mass matrices (row-major, n x n).
pub fn element_matrices(order: usize, v: &[Vec2; 3], q: &Quadrature) -> (Vec<f64>, Vec<f64>) {
    let n = if order == 2 { 6 } else { 3 };
    let (area, dl) = bary_gradients(v);
    let mut s = vec![0.0; n * n];
    let mut m = vec![0.0; n * n];
    for (l, w) in q.points.iter().zip(&q.weights) {
        let wa = w * area;
        let nv = shape_values(order, *l);
        let gv = shape_grads(order, *l, &dl);
        for i in 0..n {
            for j in 0..n {
                s[i * n + j] += wa * dot(gv[i], gv[j]);
                m[i * n + j] += wa * nv[i] * nv[j];
            }
        }
    }
    (s, m)
}

/// Imaginary cross term of the shifted form: entry (r, c) is
/// integral of N_c k.grad N_r - N_r k.grad N_c.
pub fn element_cross(order: usize, v: &[Vec2; 3], k: Vec2, q: &Quadrature) -> Vec<f64> {
    let n = if order == 2 { 6 } else { 3 };
    let (area, dl) = bary_gradients(v);
    let mut c = vec![0.0; n * n];
    for (l, w) in q.points.iter().zip(&q.weights) {
        let wa = w * area;
        let nv = shape_values(order, *l);
        let gv = shape_grads(order, *l, &dl);
        for r in 0..n {
            for col in 0..n {
                c[r * n + col] += wa * (nv[col] * dot(k, gv[r]) - nv[r] * dot(k, gv[col]));
            }
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BlochForm {
    #[default]
    NodalPhase,
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BcKind {
    Bloch(QuasiMomentum),
    CellDirichlet,
    CellNeumann,
    InclusionDirichlet,
}

/// Which index set the reduced unknowns refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DofSpace {
    /// Periodic mesh DOFs.
    Periodic,
    /// Geometric mesh nodes.
    Nodes,
}

#[derive(Debug, Clone)]
pub struct BlochOperatorMatrices {
    pub a: SpMat,
    pub m: SpMat,
    pub bc: BcKind,
    pub g: f64,
    pub space: DofSpace,
    /// Reduced index -> DOF or node index in `space`.
    pub dof_map: Vec<usize>,
}

impl BlochOperatorMatrices {
    pub fn n(&self) -> usize {
        self.dof_map.len()
    }

    /// Scatter a reduced vector to the full index space of `space`.
    pub fn expand(&self, x: &[c64], full_len: usize) -> Vec<c64> {
        let mut out = vec![c64::new(0.0, 0.0); full_len];
        for (r, &d) in self.dof_map.iter().enumerate() {
            out[d] = x[r];
        }
        out
    }
}

/// Per-region coefficients (inclusion A, inclusion B, bulk); `None` skips the region.
pub type RegionWeights = [Option<f64>; 3];

pub fn sigma_weights(g: f64) -> RegionWeights {
    [Some(1.0), Some(1.0), Some(g)]
}

/// Options shared by the Bloch assemblers.
#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    pub k: Vec2,
    pub form: BlochForm,
    pub weights: RegionWeights,
    /// Mass restricted to the same regions as the stiffness.
    pub mass_all_regions: bool,
}

/// Low-level assembly over the elements of `mesh`, with node -> unknown map.
pub fn assemble_with(
    mesh: &Mesh,
    opts: &AssemblyOptions,
    index: &(dyn Fn(usize) -> Option<usize> + Sync),
    n: usize,
) -> Result<(SpMat, SpMat)> {
    let q = Quadrature::for_order(mesh.order);
    let npe = mesh.nodes_per_element();
    let k = opts.k;
    let kk = dot(k, k);
    let elems: Vec<usize> = (0..mesh.n_elements()).collect();
    type Trip = Triplet<usize, usize, c64>;
    let parts: Vec<(Vec<Trip>, Vec<Trip>)> = elems
        .par_iter()
        .map(|&e| {
            let reg = mesh.regions[e] as usize;
            let sig = opts.weights[reg];
            let mut ta = Vec::new();
            let mut tm = Vec::new();
            if sig.is_none() && !opts.mass_all_regions {
                return (ta, tm);
            }
            let v = mesh.vertices(e);
            let (s, m) = element_matrices(mesh.order, &v, &q);
            let cross = if opts.form == BlochForm::Shifted && kk > 0.0 {
                Some(element_cross(mesh.order, &v, k, &q))
            } else {
                None
            };
            let el = mesh.element(e);
            let idx: Vec<Option<usize>> = el.iter().map(|&nd| index(nd)).collect();
            for r in 0..npe {
                let Some(ir) = idx[r] else { continue };
                for c in 0..npe {
                    let Some(ic) = idx[c] else { continue };
                    let (sv, mv) = match opts.form {
                        BlochForm::NodalPhase => {
                            let ph = cis(dot(k, sub(mesh.nodes[el[c]], mesh.nodes[el[r]])));
                            (ph * s[r * npe + c], ph * m[r * npe + c])
                        }
                        BlochForm::Shifted => {
                            let im = cross.as_ref().map_or(0.0, |x| x[r * npe + c]);
                            (
                                c64::new(s[r * npe + c] + kk * m[r * npe + c], im),
                                c64::new(m[r * npe + c], 0.0),
                            )
                        }
                    };
                    if let Some(sig) = sig {
                        ta.push(Triplet::new(ir, ic, sv * sig));
                    }
                    tm.push(Triplet::new(ir, ic, mv));
                }
            }
            (ta, tm)
        })
        .collect();
    let mut ta = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
    let mut tm = Vec::with_capacity(parts.iter().map(|p| p.1.len()).sum());
    for (a, m) in parts {
        ta.extend(a);
        tm.extend(m);
    }
    Ok((from_triplets(n, n, &ta)?, from_triplets(n, n, &tm)?))
}

fn check_g(g: f64) -> Result<()> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::Invalid(format!("contrast g must be > 0, got {g}")));
    }
    Ok(())
}

pub fn assemble_bloch_form(mesh: &Mesh, g: f64, k: QuasiMomentum, form: BlochForm) -> Result<BlochOperatorMatrices> {
    check_g(g)?;
    let opts = AssemblyOptions {
        k: k.k,
        form,
        weights: sigma_weights(g),
        mass_all_regions: true,
    };
    let map = |nd: usize| Some(mesh.node_dof[nd]);
    let (a, m) = assemble_with(mesh, &opts, &map, mesh.n_dofs())?;
    Ok(BlochOperatorMatrices {
        a,
        m,
        bc: BcKind::Bloch(k),
        g,
        space: DofSpace::Periodic,
        dof_map: (0..mesh.n_dofs()).collect(),
    })
}

/// Fiber matrices A(g, k), M(k).
pub fn assemble_bloch(mesh: &Mesh, g: f64, k: QuasiMomentum) -> Result<BlochOperatorMatrices> {
    assemble_bloch_form(mesh, g, k, BlochForm::NodalPhase)
}

/// Cell problems at k = 0 without periodic identification.
pub fn assemble_cell_variant(mesh: &Mesh, g: f64, bc: BcKind) -> Result<BlochOperatorMatrices> {
    check_g(g)?;
    let opts = AssemblyOptions {
        k: [0.0, 0.0],
        form: BlochForm::NodalPhase,
        weights: sigma_weights(g),
        mass_all_regions: true,
    };
    let nn = mesh.nodes.len();
    let keep: Vec<bool> = match bc {
        BcKind::CellNeumann => vec![true; nn],
        BcKind::CellDirichlet => {
            let b = crate::lattice::LatticeBasis::honeycomb();
            mesh.nodes
                .iter()
                .map(|&x| {
                    let t = b.to_frac(x);
                    !t.iter().any(|&s| s.abs() < 1e-9 || (s - 1.0).abs() < 1e-9)
                })
                .collect()
        }
        _ => {
            return Err(Error::Invalid(
                "cell variant must be cell-dirichlet or cell-neumann".into(),
            ))
        }
    };
    let mut red = vec![usize::MAX; nn];
    let mut dof_map = Vec::new();
    for i in 0..nn {
        if keep[i] {
            red[i] = dof_map.len();
            dof_map.push(i);
        }
    }
    let map = |nd: usize| if red[nd] == usize::MAX { None } else { Some(red[nd]) };
    let (a, m) = assemble_with(mesh, &opts, &map, dof_map.len())?;
    Ok(BlochOperatorMatrices {
        a,
        m,
        bc,
        g,
        space: DofSpace::Nodes,
        dof_map,
    })
}

/// Dirichlet Laplacian on the interior DOFs of one inclusion, at
/// quasimomentum `k` (only phases change; the spectrum is k-independent).
pub fn assemble_inclusion_dirichlet_at(mesh: &Mesh, region: Region, k: Vec2) -> Result<BlochOperatorMatrices> {
    let class = match region {
        Region::InclusionA => NodeClass::InteriorA,
        Region::InclusionB => NodeClass::InteriorB,
        Region::Bulk => return Err(Error::Invalid("inclusion region required".into())),
    };
    let classes = mesh.dof_classes();
    let mut red = vec![usize::MAX; mesh.n_dofs()];
    let mut dof_map = Vec::new();
    for d in 0..mesh.n_dofs() {
        if classes[d] == class {
            red[d] = dof_map.len();
            dof_map.push(d);
        }
    }
    if dof_map.is_empty() {
        return Err(Error::Invalid("inclusion has no interior DOFs".into()));
    }
    let mut weights: RegionWeights = [None, None, None];
    weights[region as usize] = Some(1.0);
    let opts = AssemblyOptions {
        k,
        form: BlochForm::NodalPhase,
        weights,
        mass_all_regions: false,
    };
    let map = |nd: usize| {
        let d = mesh.node_dof[nd];
        if red[d] == usize::MAX {
            None
        } else {
            Some(red[d])
        }
    };
    let (a, m) = assemble_with(mesh, &opts, &map, dof_map.len())?;
    Ok(BlochOperatorMatrices {
        a,
        m,
        bc: BcKind::InclusionDirichlet,
        g: 1.0,
        space: DofSpace::Periodic,
        dof_map,
    })
}

pub fn assemble_inclusion_dirichlet(mesh: &Mesh) -> Result<BlochOperatorMatrices> {
    assemble_inclusion_dirichlet_at(mesh, Region::InclusionA, [0.0, 0.0])
}

/// Region-split fiber matrices at k on periodic DOFs: stiffness on the
/// inclusions, stiffness on the bulk (sigma = 1), and the full mass.
#[derive(Debug, Clone)]
pub struct SplitForms {
    pub a_plus: SpMat,
    pub a_minus: SpMat,
    pub m: SpMat,
    pub m_plus: SpMat,
}

pub fn assemble_split(mesh: &Mesh, k: Vec2) -> Result<SplitForms> {
    let map = |nd: usize| Some(mesh.node_dof[nd]);
    let n = mesh.n_dofs();
    let mk = |w: RegionWeights, all: bool| {
        assemble_with(
            mesh,
            &AssemblyOptions {
                k,
                form: BlochForm::NodalPhase,
                weights: w,
                mass_all_regions: all,
            },
            &map,
            n,
        )
    };
    let (a_plus, m_plus) = mk([Some(1.0), Some(1.0), None], false)?;
    let (a_minus, m) = mk([None, None, Some(1.0)], true)?;
    Ok(SplitForms {
        a_plus,
        a_minus,
        m,
        m_plus,
    })
}

/// Indices of DOFs outside the inclusion interiors (interface and bulk).
pub fn bulk_dofs(mesh: &Mesh) -> Vec<usize> {
    mesh.dof_classes()
        .iter()
        .enumerate()
        .filter(|(_, c)| !matches!(c, NodeClass::InteriorA | NodeClass::InteriorB))
        .map(|(i, _)| i)
        .collect()
}

/// Neumann trace of the orbital as a load on bulk DOFs:
/// v -> integral over the inclusions of grad pA . conj(grad v) - delta pA conj(v).
/// `p_a` is a full periodic DOF vector; the result is indexed like `bulk_dofs`.
pub fn corrector_rhs(mesh: &Mesh, k: QuasiMomentum, p_a: &[c64], delta: f64) -> Result<(Vec<usize>, Vec<c64>)> {
    let split = assemble_split(mesh, k.k)?;
    let ap = crate::linalg::spmv(&split.a_plus, p_a);
    let mp = crate::linalg::spmv(&split.m_plus, p_a);
    let bulk = bulk_dofs(mesh);
    let f = bulk.iter().map(|&d| ap[d] - mp[d] * delta).collect();
    Ok((bulk, f))
}

/// Local Bloch-mode values Phi at the nodes of element `e` from periodic-part DOFs.
pub fn element_phi(mesh: &Mesh, e: usize, phi: &[c64], k: Vec2) -> Vec<c64> {
    mesh.element(e)
        .iter()
        .map(|&nd| cis(dot(k, mesh.nodes[nd])) * phi[mesh.node_dof[nd]])
        .collect()
}

/// Integral over the regions with weight of sigma * f(Phi, grad Phi, Psi, grad Psi).
pub fn integrate_pair(
    mesh: &Mesh,
    k: Vec2,
    u: &[c64],
    v: &[c64],
    weights: RegionWeights,
    f: impl Fn(c64, [c64; 2], c64, [c64; 2]) -> c64 + Sync,
) -> c64 {
    let q = Quadrature::degree5();
    let elems: Vec<usize> = (0..mesh.n_elements()).collect();
    elems
        .par_iter()
        .map(|&e| {
            let Some(sig) = weights[mesh.regions[e] as usize] else {
                return c64::new(0.0, 0.0);
            };
            let v3 = mesh.vertices(e);
            let (area, dl) = bary_gradients(&v3);
            let ue = element_phi(mesh, e, u, k);
            let ve = element_phi(mesh, e, v, k);
            let mut acc = c64::new(0.0, 0.0);
            for (l, w) in q.points.iter().zip(&q.weights) {
                let nv = shape_values(mesh.order, *l);
                let gv = shape_grads(mesh.order, *l, &dl);
                let mut uu = c64::new(0.0, 0.0);
                let mut vv = c64::new(0.0, 0.0);
                let mut gu = [c64::new(0.0, 0.0); 2];
                let mut gw = [c64::new(0.0, 0.0); 2];
                for i in 0..nv.len() {
                    uu += ue[i] * nv[i];
                    vv += ve[i] * nv[i];
                    for d in 0..2 {
                        gu[d] += ue[i] * gv[i][d];
                        gw[d] += ve[i] * gv[i][d];
                    }
                }
                acc += f(uu, gu, vv, gw) * (w * area * sig);
            }
            acc
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_integral(q: &Quadrature, v: &[Vec2; 3], f: impl Fn(Vec2) -> f64) -> f64 {
        let a = signed_area(v[0], v[1], v[2]);
        q.points
            .iter()
            .zip(&q.weights)
            .map(|(l, w)| {
                let x = [
                    l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
                    l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
                ];
                w * a * f(x)
            })
            .sum()
    }

    #[test]
    fn rules_integrate_monomials() {
        // Integral of x^a y^b over the unit right triangle is a! b! / (a+b+2)!.
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let fact = |n: u32| (1..=n).product::<u32>().max(1) as f64;
        for (q, deg) in [(Quadrature::degree2(), 2), (Quadrature::degree4(), 4), (Quadrature::degree5(), 5)] {
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    let exact = fact(a) * fact(b) / fact(a + b + 2);
                    let got = poly_integral(&q, &v, |x| x[0].powi(a as i32) * x[1].powi(b as i32));
                    assert!((got - exact).abs() < 1e-14, "deg {deg}: x^{a} y^{b}");
                }
            }
        }
    }

    #[test]
    fn p2_stiffness_annihilates_constants() {
        let v = [[0.1, 0.0], [1.0, 0.2], [0.3, 0.9]];
        let (s, m) = element_matrices(2, &v, &Quadrature::degree4());
        for i in 0..6 {
            let row: f64 = (0..6).map(|j| s[i * 6 + j]).sum();
            assert!(row.abs() < 1e-13);
        }
        let total: f64 = m.iter().sum();
        assert!((total - signed_area(v[0], v[1], v[2])).abs() < 1e-14);
    }
}
