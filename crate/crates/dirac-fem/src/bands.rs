//! Band sweeps over k and g, and the band-level diagnostics built on them.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::eigen::{solve_gep_with, EigenOptions};
use crate::error::{Error, Result};
use crate::fem::{assemble_bloch, assemble_cell_variant, assemble_inclusion_dirichlet, BcKind};
use crate::lattice::{KPath, KSample, QuasiMomentum, Vec2};
use crate::mesh::Mesh;
use crate::par::prelude::*;

/// Mesh parameters recorded with every artifact; segment counts are after refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshProvenance {
    pub r0: f64,
    pub nseg: usize,
    pub m_edge: usize,
    pub refine: usize,
    pub order: usize,
    pub n_dofs: usize,
    pub h_max: f64,
}

impl MeshProvenance {
    pub fn of(mesh: &Mesh) -> Self {
        Self {
            r0: mesh.geometry.r0,
            nseg: mesh.geometry.effective_nseg(mesh.refine),
            m_edge: mesh.geometry.m_edge << mesh.refine,
            refine: mesh.refine,
            order: mesh.order,
            n_dofs: mesh.n_dofs(),
            h_max: mesh.max_diameter(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandTable {
    pub k_samples: Vec<KSample>,
    pub g: f64,
    /// rows = k samples, columns = band index
    pub bands: Vec<Vec<f64>>,
    pub nbands: usize,
    pub provenance: MeshProvenance,
}

impl BandTable {
    pub fn band(&self, n: usize) -> Vec<f64> {
        self.bands.iter().map(|row| row[n - 1]).collect()
    }
}

pub type Vectors = Vec<Vec<c64>>;

/// Ascending lambda_1..lambda_nbands at (g, k), with eigenvectors if asked.
pub fn bands_at_k(
    mesh: &Mesh,
    g: f64,
    k: Vec2,
    nbands: usize,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Vectors>)> {
    if nbands == 0 {
        return Err(Error::Invalid("nbands must be >= 1".into()));
    }
    let ops = assemble_bloch(mesh, g, QuasiMomentum { k })?;
    let sol = solve_gep_with(&ops.a, &ops.m, &EigenOptions::with_nev(nbands))?;
    let lambdas = sol.pairs.iter().map(|p| p.lambda).collect();
    let vecs = want_vectors.then(|| sol.pairs.into_iter().map(|p| p.vector).collect());
    Ok((lambdas, vecs))
}

pub fn sweep_path(mesh: &Mesh, g: f64, path: &KPath, nbands: usize) -> Result<BandTable> {
    let samples = path.samples();
    let ks: Vec<Vec2> = samples.iter().map(|s| s.k.k).collect();
    let bands = sweep_points(mesh, g, &ks, nbands)?;
    Ok(BandTable {
        k_samples: samples,
        g,
        bands,
        nbands,
        provenance: MeshProvenance::of(mesh),
    })
}

/// Eigenvalues at arbitrary k points, computed independently per point.
pub fn sweep_points(mesh: &Mesh, g: f64, ks: &[Vec2], nbands: usize) -> Result<Vec<Vec<f64>>> {
    ks.par_iter()
        .map(|&k| bands_at_k(mesh, g, k, nbands, false).map(|r| r.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracketing {
    pub n: usize,
    pub k: Vec2,
    pub g: f64,
    pub neumann: f64,
    pub bloch: f64,
    pub dirichlet: f64,
    pub holds: bool,
}

/// Cell Neumann and Dirichlet eigenvalues 1..=n at contrast g.
pub fn cell_spectra(mesh: &Mesh, g: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let opts = EigenOptions::with_nev(n);
    let neu = assemble_cell_variant(mesh, g, BcKind::CellNeumann)?;
    let dir = assemble_cell_variant(mesh, g, BcKind::CellDirichlet)?;
    let ln = solve_gep_with(&neu.a, &neu.m, &opts)?;
    let ld = solve_gep_with(&dir.a, &dir.m, &opts)?;
    Ok((
        ln.pairs.iter().map(|p| p.lambda).collect(),
        ld.pairs.iter().map(|p| p.lambda).collect(),
    ))
}

fn bracket(n: usize, k: Vec2, g: f64, neumann: f64, bloch: f64, dirichlet: f64) -> Bracketing {
    let eps = 1e-8 * dirichlet.abs();
    Bracketing {
        n,
        k,
        g,
        neumann,
        bloch,
        dirichlet,
        holds: neumann <= bloch + eps && bloch <= dirichlet + eps,
    }
}

pub fn bracketing_check(mesh: &Mesh, g: f64, n: usize, k: Vec2) -> Result<Bracketing> {
    if n == 0 {
        return Err(Error::Invalid("band index n must be >= 1".into()));
    }
    let (neu, dir) = cell_spectra(mesh, g, n)?;
    let (bl, _) = bands_at_k(mesh, g, k, n, false)?;
    Ok(bracket(n, k, g, neu[n - 1], bl[n - 1], dir[n - 1]))
}

/// Bracketing for every n in 1..=nmax at every k, sharing the cell solves.
pub fn bracketing_batch(mesh: &Mesh, g: f64, nmax: usize, ks: &[Vec2]) -> Result<Vec<Bracketing>> {
    let (neu, dir) = cell_spectra(mesh, g, nmax)?;
    let rows = sweep_points(mesh, g, ks, nmax)?;
    let mut out = Vec::with_capacity(ks.len() * nmax);
    for (k, row) in ks.iter().zip(&rows) {
        for n in 1..=nmax {
            out.push(bracket(n, *k, g, neu[n - 1], row[n - 1], dir[n - 1]));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monotonicity {
    pub k: Vec2,
    pub n: usize,
    pub g_list: Vec<f64>,
    pub values: Vec<f64>,
    pub holds: bool,
}

pub fn monotonicity_scan(mesh: &Mesh, k: Vec2, n: usize, g_list: &[f64]) -> Result<Monotonicity> {
    if g_list.len() < 2 || g_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("g_list must be ascending with >= 2 entries".into()));
    }
    if n == 0 {
        return Err(Error::Invalid("band index n must be >= 1".into()));
    }
    let values: Vec<f64> = g_list
        .par_iter()
        .map(|&g| bands_at_k(mesh, g, k, n, false).map(|r| r.0[n - 1]))
        .collect::<Result<_>>()?;
    let at_gamma = k[0] == 0.0 && k[1] == 0.0;
    let holds = if n == 1 && at_gamma {
        let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        values.iter().all(|v| v.abs() <= 1e-8 * scale)
    } else {
        values.windows(2).all(|w| w[1] > w[0])
    };
    Ok(Monotonicity {
        k,
        n,
        g_list: g_list.to_vec(),
        values,
        holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n: usize,
    pub sup_band: f64,
    pub inf_next: f64,
    pub gap_exists: bool,
}

pub fn gap_report(table: &BandTable, n: usize) -> Result<GapReport> {
    if n == 0 || n + 1 > table.nbands {
        return Err(Error::Invalid(format!(
            "gap between bands {n} and {} needs at least {} bands, table has {}",
            n,
            n + 1,
            table.nbands
        )));
    }
    let sup_band = table.band(n).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let inf_next = table.band(n + 1).into_iter().fold(f64::INFINITY, f64::min);
    Ok(GapReport {
        n,
        sup_band,
        inf_next,
        gap_exists: sup_band < inf_next,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformLimit {
    pub n: usize,
    /// Discrete inclusion Dirichlet eigenvalue the pair collapses onto.
    pub delta: f64,
    pub g_list: Vec<f64>,
    /// max_k |lambda_{2n} - delta| per g
    pub even_dev: Vec<f64>,
    /// max_k |lambda_{2n-1} - delta| per g, k away from 0
    pub odd_dev: Vec<f64>,
    /// lambda_{2n-1}(g; 0) per g
    pub odd_at_gamma: Vec<f64>,
    pub even_decreasing: bool,
    pub odd_decreasing: bool,
}

/// Convergence of the band pair (2n-1, 2n) onto the n-th inclusion
/// Dirichlet eigenvalue of the mesh. `k_samples` must avoid 0.
pub fn uniform_limit_check(mesh: &Mesh, n: usize, g_list: &[f64], k_samples: &[Vec2]) -> Result<UniformLimit> {
    if n == 0 {
        return Err(Error::Invalid("n must be >= 1".into()));
    }
    if k_samples.iter().any(|k| k[0].hypot(k[1]) < 1e-6) {
        return Err(Error::Invalid("k_samples must exclude k = 0".into()));
    }
    let delta = dirichlet_eigenvalue(mesh, n)?;
    let nb = 2 * n;
    let mut even_dev = Vec::new();
    let mut odd_dev = Vec::new();
    let mut odd_at_gamma = Vec::new();
    for &g in g_list {
        let rows = sweep_points(mesh, g, k_samples, nb)?;
        even_dev.push(rows.iter().map(|r| (r[nb - 1] - delta).abs()).fold(0.0, f64::max));
        odd_dev.push(rows.iter().map(|r| (r[nb - 2] - delta).abs()).fold(0.0, f64::max));
        let (l0, _) = bands_at_k(mesh, g, [0.0, 0.0], nb, false)?;
        odd_at_gamma.push(l0[nb - 2]);
    }
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    Ok(UniformLimit {
        n,
        delta,
        g_list: g_list.to_vec(),
        even_decreasing: dec(&even_dev),
        odd_decreasing: dec(&odd_dev),
        even_dev,
        odd_dev,
        odd_at_gamma,
    })
}

/// n-th inclusion Dirichlet eigenvalue of the mesh, counted with multiplicity.
pub fn dirichlet_eigenvalue(mesh: &Mesh, n: usize) -> Result<f64> {
    let inc = assemble_inclusion_dirichlet(mesh)?;
    if n == 0 || n > inc.n() {
        return Err(Error::Invalid(format!("Dirichlet index {n} out of range")));
    }
    let sol = solve_gep_with(&inc.a, &inc.m, &EigenOptions::with_nev(n))?;
    Ok(sol.pairs[n - 1].lambda)
}
