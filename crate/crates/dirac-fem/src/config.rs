//! Run configuration: a sectioned key = value text file (TOML subset).
//!
//! ```toml
//! [geometry]
//! r0 = 0.2
//! nseg = 24        # circle segments before refinement
//! m_edge = 8
//!
//! [mesh]
//! refine = 2
//! order = 2
//!
//! [physics]
//! g = 100.0
//! g_list = [1000.0, 2000.0, 4000.0, 8000.0]
//!
//! [spectral]
//! nbands = 3
//! samples_per_segment = 12
//!
//! [study]
//! kind = "bands"
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Every section and key is optional; missing values take the defaults
//! shown by `RunConfig::default()`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::CellGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Mesh,
    Oracle,
    Bands,
    Bracketing,
    Dirac,
    ScanG,
    Asymptotics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub r0: f64,
    pub nseg: usize,
    pub m_edge: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub refine: usize,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub g: f64,
    pub g_list: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub nbands: usize,
    pub samples_per_segment: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    pub kind: StudyKind,
    /// For `dirac`: run the transition scan instead of the single-g report.
    pub scan: bool,
    /// Bracket for the transition bisection.
    pub g_lo: f64,
    pub g_hi: f64,
    /// Contrasts sampled on the transition CSV.
    pub scan_points: usize,
    pub cone_directions: usize,
    /// Random k count for bracketing.
    pub n_random_k: usize,
    pub seed: u64,
    /// Radial orbital index for the asymptotics study.
    pub q: usize,
    /// Number of disc eigenvalues for the oracle table.
    pub oracle_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub mesh: MeshSection,
    pub physics: PhysicsSection,
    pub spectral: SpectralSection,
    pub study: StudySection,
    pub output: OutputSection,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = CellGeometry::default();
        Self {
            r0: g.r0,
            nseg: g.nseg,
            m_edge: g.m_edge,
        }
    }
}

impl Default for MeshSection {
    fn default() -> Self {
        Self { refine: 2, order: 2 }
    }
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            g: 100.0,
            g_list: vec![1000.0, 2000.0, 4000.0, 8000.0],
        }
    }
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self {
            nbands: 3,
            samples_per_segment: 12,
        }
    }
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            kind: StudyKind::Bands,
            scan: false,
            g_lo: 10.0,
            g_hi: 20.0,
            scan_points: 11,
            cone_directions: 6,
            n_random_k: 10,
            seed: 7,
            q: 1,
            oracle_count: 20,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn cell_geometry(&self) -> CellGeometry {
        CellGeometry {
            r0: self.geometry.r0,
            nseg: self.geometry.nseg,
            m_edge: self.geometry.m_edge,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cell_geometry()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(1..=2).contains(&self.mesh.order) {
            return Err(field_err("mesh.order", format!("must be 1 or 2, got {}", self.mesh.order)));
        }
        if self.mesh.refine > 5 {
            return Err(field_err("mesh.refine", format!("must be <= 5, got {}", self.mesh.refine)));
        }
        if !(self.physics.g > 0.0 && self.physics.g.is_finite()) {
            return Err(field_err("physics.g", format!("must be finite and > 0, got {}", self.physics.g)));
        }
        if let Some(bad) = self.physics.g_list.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(field_err("physics.g_list", format!("entries must be finite and > 0, got {bad}")));
        }
        if self.spectral.nbands == 0 {
            return Err(field_err("spectral.nbands", "must be >= 1"));
        }
        if self.spectral.samples_per_segment == 0 {
            return Err(field_err("spectral.samples_per_segment", "must be >= 1"));
        }
        let s = &self.study;
        if !(s.g_lo > 0.0 && s.g_hi > s.g_lo) {
            return Err(field_err("study.g_lo", format!("need 0 < g_lo < g_hi, got [{}, {}]", s.g_lo, s.g_hi)));
        }
        if s.scan_points < 2 {
            return Err(field_err("study.scan_points", "must be >= 2"));
        }
        // TOML integers are signed 64-bit.
        if s.seed > i64::MAX as u64 {
            return Err(field_err("study.seed", format!("must be <= {}", i64::MAX)));
        }
        if s.q == 0 {
            return Err(field_err("study.q", "must be >= 1"));
        }
        if s.oracle_count == 0 {
            return Err(field_err("study.oracle_count", "must be >= 1"));
        }
        Ok(())
    }
}
