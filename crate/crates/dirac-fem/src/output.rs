//! CSV and JSON artifacts.
//!
//! Every CSV starts with `#` lines carrying the tool version, the schema
//! name, the config hash and the mesh provenance, followed by one column
//! header line. Floats are written in `{:.16e}` (17 significant digits).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bands::MeshProvenance;
use crate::error::Result;

pub const TOOL_VERSION: &str = concat!("dirac-fem ", env!("CARGO_PKG_VERSION"));

/// Column layouts of the CSV outputs. Bump the suffix on any layout change.
pub mod schema {
    pub const BANDS: &str = "bands/1";
    pub const ORACLE: &str = "oracle/1";
    pub const BRACKETING: &str = "bracketing/1";
    pub const DIRAC_SCAN: &str = "dirac-scan/1";
    pub const VELOCITY: &str = "velocity/1";
    pub const ASYMPTOTICS: &str = "asymptotics/1";

    pub const ORACLE_COLUMNS: &[&str] = &["value", "p", "q", "multiplicity", "satisfies_S"];
    pub const BRACKETING_COLUMNS: &[&str] = &["kx", "ky", "n", "neumann", "bloch", "dirichlet", "holds"];
    pub const DIRAC_SCAN_COLUMNS: &[&str] = &["g", "lambda1K", "lambda2K", "lambda3K", "label_simple_branch"];
    pub const VELOCITY_COLUMNS: &[&str] = &["g", "v_formula", "v_cone", "g_times_v"];
    pub const ASYMPTOTICS_COLUMNS: &[&str] = &[
        "g",
        "lambda_D",
        "prediction_M0",
        "prediction_M1",
        "residual_M0",
        "residual_M1",
        "eta_M0",
        "eta_M1",
        "l2_dev",
        "h1_dev",
    ];

    pub fn bands_columns(nbands: usize) -> Vec<String> {
        let mut c: Vec<String> = ["arclength", "kx", "ky"].iter().map(|s| s.to_string()).collect();
        c.extend((1..=nbands).map(|n| format!("lambda_{n}")));
        c
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV cell.
pub enum Cell {
    F(f64),
    I(usize),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(n) => n.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::I(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::S(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_owned())
    }
}

#[derive(Debug, Clone)]
pub struct Header {
    pub schema: String,
    pub config_hash: String,
    pub provenance: Option<MeshProvenance>,
}

impl Header {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# tool: {TOOL_VERSION}");
        let _ = writeln!(s, "# schema: {}", self.schema);
        let _ = writeln!(s, "# config_sha256: {}", self.config_hash);
        match &self.provenance {
            Some(p) => {
                let _ = writeln!(
                    s,
                    "# mesh: r0={} nseg={} m_edge={} refine={} order={} n_dofs={} h_max={}",
                    p.r0, p.nseg, p.m_edge, p.refine, p.order, p.n_dofs, fmt_f64(p.h_max)
                );
            }
            None => {
                let _ = writeln!(s, "# mesh: none");
            }
        }
        s
    }
}

pub fn render_csv<C: AsRef<str>>(header: &Header, columns: &[C], rows: &[Vec<Cell>]) -> String {
    let mut s = header.render();
    let cols: Vec<&str> = columns.iter().map(AsRef::as_ref).collect();
    s.push_str(&cols.join(","));
    s.push('\n');
    for r in rows {
        debug_assert_eq!(r.len(), cols.len());
        let cells: Vec<String> = r.iter().map(Cell::render).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Writes run artifacts under one directory, one file at a time.
pub struct ArtifactWriter {
    pub dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let p = self.dir.join(name);
        std::fs::write(&p, body)?;
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn csv<C: AsRef<str>>(&mut self, name: &str, header: &Header, columns: &[C], rows: &[Vec<Cell>]) -> Result<PathBuf> {
        self.text(name, &render_csv(header, columns, rows))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let body = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Numerical(e.to_string()))?;
        self.text(name, &(body + "\n"))
    }
}

/// Top-level JSON summary of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub tool: String,
    pub study: String,
    pub config_sha256: String,
    pub provenance: Option<MeshProvenance>,
    /// ok, partial or failed
    pub status: String,
    pub error: Option<String>,
    /// Named invariant checks and whether they held.
    pub checks: Vec<(String, bool)>,
    pub artifacts: Vec<String>,
    pub details: serde_json::Value,
}
