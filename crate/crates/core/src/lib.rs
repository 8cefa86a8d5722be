//! Laplace–Beltrami eigenproblems on geodesic triangles of constant curvature.
//!
//! The crate meshes a geodesic triangle in the Poincaré chart, assembles P1
//! stiffness and curvature-weighted mass matrices, solves for the lowest
//! Neumann or mixed eigenpairs and extracts nodal lines, critical points and
//! Killing-field derivatives of the eigenfunctions.

pub mod analysis;
pub mod cli;
pub mod continuation;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod killing;
pub mod mesh;
pub mod theorems;
mod quadrature;

pub use error::{Error, Result};
