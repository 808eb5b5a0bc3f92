//! Finite-element Floquet-Bloch spectra of the high-contrast honeycomb
//! operator -div(sigma_g grad) with two disc inclusions per cell.

pub mod asymptotics;
pub mod bands;
pub mod bessel;
pub mod cli;
pub mod config;
pub mod dirac;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod fit;
pub mod lattice;
pub mod linalg;
pub mod mesh;
pub mod mesh_io;
pub mod output;
pub mod par;
pub mod symmetry;

pub use error::{Error, Result};
