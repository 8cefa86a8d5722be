use thiserror::Error;

use crate::fem::Spectrum;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside the chart domain: {0}")]
    Domain(String),
    #[error("unsupported chart conversion: {0}")]
    UnsupportedConversion(String),
    #[error("degenerate triangle: {0}")]
    DegenerateTriangle(String),
    #[error("degenerate geodesic: the two defining points coincide")]
    DegenerateGeodesic,
    #[error("unsupported Killing field kind: {0}")]
    UnsupportedKind(String),
    #[error("point is not on the geodesic (offset {0:e})")]
    PointNotOnGeodesic(f64),
    #[error("Killing field vanishes at the evaluation point")]
    ZeroField,
    #[error("mesh failure: {0}")]
    MeshFailure(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("eigensolver did not converge within {max_iterations} iterations")]
    NoConvergence {
        max_iterations: usize,
        partial: Box<Spectrum>,
    },
    #[error("zero vector in Rayleigh quotient")]
    ZeroVector,
    #[error("spectrum has {have} pairs, {need} needed")]
    InsufficientPairs { have: usize, need: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("fitting radii leave the triangle at vertex {vertex}")]
    RadiiOutsideTriangle { vertex: usize },
    #[error("continuation step failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
