//! Dirac points at K: degeneracy, symmetry-adapted eigenbasis, velocity
//! by the overlap integral and by finite differences of the cone.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::bands::{bands_at_k, MeshProvenance};
use crate::error::{Error, Result};
use crate::fem::{integrate_pair, sigma_weights};
use crate::fit::{loglog_slope, relative_spread};
use crate::lattice::{add, norm, scale, vertex_points, LatticeBasis, Vec2};
use crate::mesh::Mesh;
use crate::par::prelude::*;
use crate::symmetry::{
    build_pc_action, build_rotation_action, classify, inner_m, project_symmetry, projector, Label,
    SymmetryAction,
};

pub const DEGENERACY_TOL: f64 = 1e-6;

pub fn k_point() -> Vec2 {
    vertex_points(&LatticeBasis::honeycomb()).0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Degeneracy {
    Pair { n: usize, lambda_d: f64, gap_rel: f64 },
    /// Three or more eigenvalues within the tolerance, or a pair whose
    /// neighbour is not separated by 10 tolerances.
    Triple { n: usize, lambda: f64 },
    Absent,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (b - a).abs() < tol * a.abs().max(b.abs())
}

/// Smallest isolated pair in an ascending list.
pub fn find_pair(l: &[f64], tol_rel: f64) -> Degeneracy {
    for n in 1..l.len() {
        let (a, b) = (l[n - 1], l[n]);
        if !close(a, b, tol_rel) {
            continue;
        }
        let sep = 10.0 * tol_rel;
        let above = l.get(n + 1).is_some_and(|&c| close(b, c, sep));
        let below = n >= 2 && close(l[n - 2], a, sep);
        if above || below {
            return Degeneracy::Triple {
                n: if below { n - 1 } else { n },
                lambda: a,
            };
        }
        return Degeneracy::Pair {
            n,
            lambda_d: a,
            gap_rel: (b - a).abs() / a.abs(),
        };
    }
    Degeneracy::Absent
}

/// Degeneracy of the `nbands` lowest eigenvalues at k. One extra
/// eigenvalue is computed so that a pair at the top can be checked for isolation.
pub fn detect_degeneracy(mesh: &Mesh, g: f64, k: Vec2, nbands: usize, tol_rel: f64) -> Result<(Degeneracy, Vec<f64>)> {
    if nbands < 3 {
        return Err(Error::Invalid("degeneracy detection needs nbands >= 3".into()));
    }
    let (l, _) = bands_at_k(mesh, g, k, nbands + 1, false)?;
    let d = match find_pair(&l, tol_rel) {
        Degeneracy::Pair { n, .. } | Degeneracy::Triple { n, .. } if n + 1 > nbands => Degeneracy::Absent,
        d => d,
    };
    Ok((d, l[..nbands].to_vec()))
}

/// Phi1 = tau component of the cluster, Phi2 = PC Phi1.
pub fn dirac_basis(
    cluster: &[Vec<c64>],
    rot: &SymmetryAction,
    pc: &SymmetryAction,
    m: &crate::linalg::SpMat,
) -> Result<(Vec<c64>, Vec<c64>)> {
    if cluster.len() != 2 {
        return Err(Error::Invalid(format!("Dirac basis needs a 2-dimensional cluster, got {}", cluster.len())));
    }
    let (phi1, _) = project_symmetry(cluster, rot, m, Label::Tau)
        .map_err(|e| Error::Symmetry(format!("degenerate pair is not a Dirac pair: {e}")))?;
    let phi2 = pc.apply(&phi1);
    Ok((phi1, phi2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Velocity {
    /// W = integral of sigma Phi1 conj(grad Phi2)
    pub w: [c64; 2],
    /// |W . (1, i)|
    pub v_formula: f64,
    /// |W . (1, -i)|, zero by symmetry when Phi1 is the tau component
    /// under the clockwise rotation
    pub v_other: f64,
}

pub fn dirac_velocity(mesh: &Mesh, g: f64, k: Vec2, phi1: &[c64], phi2: &[c64]) -> Velocity {
    let w: [c64; 2] = [0, 1].map(|d| {
        integrate_pair(mesh, k, phi1, phi2, sigma_weights(g), move |u, _, _, gv| u * gv[d].conj())
    });
    let i = c64::new(0.0, 1.0);
    Velocity {
        w,
        v_formula: (w[0] + i * w[1]).norm(),
        v_other: (w[0] - i * w[1]).norm(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeFit {
    pub h: f64,
    pub directions: Vec<Vec2>,
    /// Richardson-extrapolated slopes of the upper and lower sheets.
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// Largest relative Richardson correction over all probes.
    pub max_correction: f64,
    pub isotropy_dev: f64,
    pub mean_slope: f64,
    pub warning: Option<String>,
}

pub fn default_directions(count: usize) -> Vec<Vec2> {
    (0..count)
        .map(|j| {
            let t = std::f64::consts::PI * (2.0 * j as f64 / count as f64 + 1.0 / 12.0);
            [t.cos(), t.sin()]
        })
        .collect()
}

/// Slopes of bands n (lower) and n+1 (upper) away from (k, lambda_d),
/// from steps h and h/2 combined as 2 s(h/2) - s(h).
pub fn cone_fit(mesh: &Mesh, g: f64, k: Vec2, n: usize, lambda_d: f64, directions: &[Vec2], h: f64) -> Result<ConeFit> {
    if directions.len() < 6 {
        return Err(Error::Invalid("cone fit needs at least 6 directions".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Invalid("cone step h must be > 0".into()));
    }
    let probes: Vec<(usize, f64)> = (0..directions.len()).flat_map(|d| [(d, h), (d, 0.5 * h)]).collect();
    let vals: Vec<(f64, f64)> = probes
        .par_iter()
        .map(|&(d, s)| {
            let kk = add(k, scale(s, directions[d]));
            let (l, _) = bands_at_k(mesh, g, kk, n + 1, false)?;
            Ok(((l[n] - lambda_d) / s, (lambda_d - l[n - 1]) / s))
        })
        .collect::<Result<_>>()?;
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut corr: f64 = 0.0;
    for d in 0..directions.len() {
        let (u1, l1) = vals[2 * d];
        let (u2, l2) = vals[2 * d + 1];
        let (ur, lr) = (2.0 * u2 - u1, 2.0 * l2 - l1);
        corr = corr.max(((ur - u1) / ur).abs()).max(((lr - l1) / lr).abs());
        upper.push(ur);
        lower.push(lr);
    }
    let avg: Vec<f64> = upper.iter().zip(&lower).map(|(a, b)| 0.5 * (a + b)).collect();
    let warning = (corr > 0.3).then(|| format!("step h = {h:e} too large: Richardson correction {corr:.3}"));
    Ok(ConeFit {
        h,
        directions: directions.to_vec(),
        mean_slope: avg.iter().sum::<f64>() / avg.len() as f64,
        isotropy_dev: relative_spread(&avg),
        upper,
        lower,
        max_correction: corr,
        warning,
    })
}

/// Eigen data of the lowest Dirac pair at K.
#[derive(Debug, Clone)]
pub struct DiracState {
    pub g: f64,
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub lambda_d: f64,
    pub gap_rel: f64,
    pub phi1: Vec<c64>,
    pub phi2: Vec<c64>,
    pub labels: [Label; 2],
    pub velocity: Velocity,
}

pub fn dirac_state(mesh: &Mesh, g: f64, nbands: usize) -> Result<DiracState> {
    let (l, vecs) = bands_at_k(mesh, g, k_point(), nbands + 1, true)?;
    let (n, gap_rel) = match find_pair(&l, DEGENERACY_TOL) {
        Degeneracy::Pair { n, gap_rel, .. } if n < nbands => (n, gap_rel),
        other => {
            return Err(Error::Numerical(format!(
                "no isolated degenerate pair among the {nbands} lowest eigenvalues at K (g = {g}): {other:?}"
            )))
        }
    };
    state_from(mesh, g, n, gap_rel, l, vecs.expect("vectors requested"), nbands)
}

/// Like `dirac_state`, for the pair expected at bands n, n + 1 (1-based).
pub fn dirac_state_at(mesh: &Mesh, g: f64, n: usize) -> Result<DiracState> {
    if n == 0 {
        return Err(Error::Invalid("band index is 1-based".into()));
    }
    let (l, vecs) = bands_at_k(mesh, g, k_point(), n + 2, true)?;
    let gap_rel = (l[n] - l[n - 1]).abs() / l[n - 1].abs();
    let sep = 10.0 * DEGENERACY_TOL;
    let isolated = !close(l[n], l[n + 1], sep) && (n < 2 || !close(l[n - 2], l[n - 1], sep));
    if gap_rel >= DEGENERACY_TOL || !isolated {
        return Err(Error::Numerical(format!(
            "bands {n}-{} at K (g = {g}) are not an isolated degenerate pair: {:?}",
            n + 1,
            &l[n.saturating_sub(2)..]
        )));
    }
    state_from(mesh, g, n, gap_rel, l, vecs.expect("vectors requested"), n + 1)
}

fn state_from(
    mesh: &Mesh,
    g: f64,
    n: usize,
    gap_rel: f64,
    l: Vec<f64>,
    vecs: Vec<Vec<c64>>,
    nbands: usize,
) -> Result<DiracState> {
    let k = k_point();
    let ops = crate::fem::assemble_bloch(mesh, g, crate::lattice::QuasiMomentum { k })?;
    let rot = build_rotation_action(mesh, k)?;
    let pc = build_pc_action(mesh, k)?;
    let (phi1, phi2) = dirac_basis(&vecs[n - 1..n + 1], &rot, &pc, &ops.m)?;
    let labels = [classify(&phi1, &rot, &ops.m).0, classify(&phi2, &rot, &ops.m).0];
    let velocity = dirac_velocity(mesh, g, k, &phi1, &phi2);
    Ok(DiracState {
        g,
        n,
        lambda_d: l[n - 1],
        lambdas: l[..nbands].to_vec(),
        gap_rel,
        phi1,
        phi2,
        labels,
        velocity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracReport {
    pub g: f64,
    pub band_index: usize,
    pub lambda_d: f64,
    pub degeneracy_gap: f64,
    pub labels: Vec<Label>,
    pub v_formula: f64,
    pub v_cone: Vec<f64>,
    pub v_cone_lower: Vec<f64>,
    pub v_cone_mean: f64,
    pub isotropy_dev: f64,
    pub passed_nondegeneracy: bool,
    pub warnings: Vec<String>,
    pub provenance: MeshProvenance,
}

pub fn dirac_report(mesh: &Mesh, g: f64, nbands: usize, h: Option<f64>, directions: usize) -> Result<DiracReport> {
    let st = dirac_state(mesh, g, nbands)?;
    let k = k_point();
    let h = h.unwrap_or(1e-3 * norm(k));
    let cone = cone_fit(mesh, g, k, st.n, st.lambda_d, &default_directions(directions), h)?;
    Ok(DiracReport {
        g,
        band_index: st.n,
        lambda_d: st.lambda_d,
        degeneracy_gap: st.gap_rel,
        labels: st.labels.to_vec(),
        v_formula: st.velocity.v_formula,
        v_cone: cone.upper.clone(),
        v_cone_lower: cone.lower.clone(),
        v_cone_mean: cone.mean_slope,
        isotropy_dev: cone.isotropy_dev,
        passed_nondegeneracy: st.velocity.v_formula > 1e-10 * st.lambda_d,
        warnings: cone.warning.into_iter().collect(),
        provenance: MeshProvenance::of(mesh),
    })
}

/// The K-point eigenvalues of the rotation-invariant branch and of the
/// tau / tau_bar pair at one contrast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub g: f64,
    pub lambdas: Vec<f64>,
    pub simple: f64,
    pub pair: f64,
    pub simple_label: Label,
    pub pair_labels: [Label; 2],
    /// 1-based band positions of the simple branch and the lower pair member.
    pub simple_band: usize,
    pub pair_band: usize,
}

/// Lowest computed band with weight in the rotation sector nu. A degenerate
/// pair splits its weight between the two vectors, so one of them carries at
/// least half of it.
fn sector_value(
    vecs: &[Vec<c64>],
    rot: &SymmetryAction,
    a: &crate::linalg::SpMat,
    m: &crate::linalg::SpMat,
    nu: c64,
) -> Result<(f64, Vec<c64>)> {
    for u in vecs {
        let p = projector(u, rot, nu);
        let w = inner_m(m, &p, &p).re / inner_m(m, u, u).re;
        if w > 0.1 {
            let rq = crate::linalg::quad_form(a, &p).re / inner_m(m, &p, &p).re;
            return Ok((rq, p));
        }
    }
    Err(Error::Symmetry("sector absent from the computed eigenvectors".into()))
}

pub fn branch_sample(mesh: &Mesh, g: f64) -> Result<BranchSample> {
    let k = k_point();
    let ops = crate::fem::assemble_bloch(mesh, g, crate::lattice::QuasiMomentum { k })?;
    let sol = crate::eigen::solve_gep_with(&ops.a, &ops.m, &crate::eigen::EigenOptions::with_nev(4))?;
    let lambdas: Vec<f64> = sol.pairs.iter().map(|p| p.lambda).collect();
    let vecs: Vec<Vec<c64>> = sol.pairs.into_iter().map(|p| p.vector).collect();
    let rot = build_rotation_action(mesh, k)?;
    let pc = build_pc_action(mesh, k)?;
    let pg = crate::lattice::PointGroupData::honeycomb();
    let (simple, us) = sector_value(&vecs, &rot, &ops.a, &ops.m, c64::new(1.0, 0.0))?;
    let (pair, ut) = sector_value(&vecs, &rot, &ops.a, &ops.m, pg.tau)?;
    let nrm = |u: &[c64]| inner_m(&ops.m, u, u).re.sqrt();
    let us: Vec<c64> = us.iter().map(|x| x / nrm(&us)).collect();
    let ut: Vec<c64> = ut.iter().map(|x| x / nrm(&ut)).collect();
    let uc = pc.apply(&ut);
    let pos = |v: f64| lambdas.iter().position(|&l| close(l, v, 1e-8)).map_or(0, |i| i + 1);
    Ok(BranchSample {
        g,
        simple_label: classify(&us, &rot, &ops.m).0,
        pair_labels: [classify(&ut, &rot, &ops.m).0, classify(&uc, &rot, &ops.m).0],
        simple_band: pos(simple),
        pair_band: pos(pair),
        lambdas,
        simple,
        pair,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub g_c: f64,
    /// Eigenvalue at the crossing and the relative spread of the three
    /// lowest eigenvalues there.
    pub lambda_c: f64,
    pub triple_spread: f64,
    pub samples: Vec<BranchSample>,
}

/// Bisection on g for the crossing of the simple rotation-invariant
/// branch with the Dirac pair at K.
pub fn transition_scan(mesh: &Mesh, g_lo: f64, g_hi: f64, tol: f64) -> Result<Transition> {
    if !(g_lo > 0.0 && g_hi > g_lo) {
        return Err(Error::Invalid(format!("need 0 < g_lo < g_hi, got [{g_lo}, {g_hi}]")));
    }
    let mut samples = Vec::new();
    let f = |s: &BranchSample| s.simple - s.pair;
    let lo = branch_sample(mesh, g_lo)?;
    let hi = branch_sample(mesh, g_hi)?;
    let (mut a, mut fa) = (g_lo, f(&lo));
    let (mut b, fb) = (g_hi, f(&hi));
    samples.push(lo);
    samples.push(hi);
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "no crossing in [{g_lo}, {g_hi}]: simple - pair = {fa:e}, {fb:e}"
        )));
    }
    let mut last = None;
    while (b - a) > tol * b {
        let c = 0.5 * (a + b);
        let s = branch_sample(mesh, c)?;
        let fc = f(&s);
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
        last = Some(s.clone());
        samples.push(s);
    }
    let g_c = 0.5 * (a + b);
    let at = match last {
        Some(s) => s,
        None => branch_sample(mesh, g_c)?,
    };
    let l3 = &at.lambdas[..3];
    Ok(Transition {
        g_c,
        lambda_c: 0.5 * (at.simple + at.pair),
        triple_spread: (l3[2] - l3[0]) / l3[0],
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityRow {
    pub g: f64,
    pub lambda_d: f64,
    pub v_formula: f64,
    /// Mean cone-fit slope, when requested.
    pub v_cone: Option<f64>,
    pub g_times_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub rows: Vec<VelocityRow>,
    pub slope: f64,
    pub plateau: f64,
    pub spread: f64,
}

/// v_D over `g_list`. With `cone_directions > 0` each row also carries an
/// independent cone-fit slope.
pub fn vd_scaling_study(mesh: &Mesh, g_list: &[f64], cone_directions: usize) -> Result<ScalingStudy> {
    let rows: Vec<VelocityRow> = g_list
        .par_iter()
        .map(|&g| {
            let st = dirac_state(mesh, g, 3)?;
            let v_cone = if cone_directions > 0 {
                let k = k_point();
                let dirs = default_directions(cone_directions);
                Some(cone_fit(mesh, g, k, st.n, st.lambda_d, &dirs, 1e-3 * norm(k))?.mean_slope)
            } else {
                None
            };
            Ok(VelocityRow {
                g,
                lambda_d: st.lambda_d,
                v_formula: st.velocity.v_formula,
                v_cone,
                g_times_v: g * st.velocity.v_formula,
            })
        })
        .collect::<Result<_>>()?;
    let gs: Vec<f64> = rows.iter().map(|r| r.g).collect();
    let vs: Vec<f64> = rows.iter().map(|r| r.v_formula).collect();
    let gv: Vec<f64> = rows.iter().map(|r| r.g_times_v).collect();
    Ok(ScalingStudy {
        slope: loglog_slope(&gs, &vs)?,
        plateau: gv.iter().sum::<f64>() / gv.len() as f64,
        spread: relative_spread(&gv),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_and_triple_detection() {
        match find_pair(&[1.0, 2.0, 2.0 + 1e-9, 3.0], 1e-6) {
            Degeneracy::Pair { n, gap_rel, .. } => {
                assert_eq!(n, 2);
                assert!((gap_rel - 5e-10).abs() < 1e-15);
            }
            other => panic!("expected a pair, got {other:?}"),
        }
        assert!(matches!(find_pair(&[1.0, 1.0, 1.0, 3.0], 1e-6), Degeneracy::Triple { n: 1, .. }));
        assert_eq!(find_pair(&[1.0, 2.0, 3.0], 1e-6), Degeneracy::Absent);
    }
}
