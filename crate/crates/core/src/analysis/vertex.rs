//! Leading coefficients of the local expansion at a triangle vertex.
//!
//! The vertex is moved to the origin of the Poincaré chart by an isometry,
//! one adjacent edge along the positive real axis, so the triangle's wedge
//! is `0 < θ < β`. The trace of the eigenfunction on two chart circles is
//! projected on the angular basis of the vertex kind, and the leading
//! coefficient is solved from `c(r)/r^p = A + B r²` at both radii.

use super::{check_len, Locator};
use crate::fem::EigenPair;
use crate::geometry::{Bc, Model, VertexKind};
use crate::mesh::TriangleMesh;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SAMPLES: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexExpansion {
    pub vertex: usize,
    pub kind: VertexKind,
    pub beta: f64,
    pub nu: f64,
    /// `(a₀, a₁)` at Neumann vertices, `(b₀)` at mixed, `(c₁)` at Dirichlet
    pub coefficients: Vec<f64>,
    /// spread between the two-radius and the single-radius estimates
    pub uncertainty: Vec<f64>,
    /// `r²` coefficient of the angular mean, Neumann vertices only
    pub radial_slope: Option<f64>,
    pub radii: [f64; 2],
}

pub fn vertex_coefficients(eig: &EigenPair, m: &TriangleMesh, vertex: usize) -> Result<VertexExpansion> {
    vertex_coefficients_with(&eig.vector, m, m.triangle.edge_bc, vertex, [6.0 * m.h, 12.0 * m.h])
}

pub fn vertex_coefficients_with(
    values: &[f64],
    m: &TriangleMesh,
    bc: [Bc; 3],
    vertex: usize,
    radii: [f64; 2],
) -> Result<VertexExpansion> {
    check_len(m, values)?;
    if vertex > 2 {
        return Err(Error::ShapeMismatch(format!("vertex index {vertex}")));
    }
    let t = m.triangle.with_bc(bc);
    let kind = t.vertex_kind(vertex);
    let beta = t.angles[vertex];
    let nu = PI / beta;
    // the two adjacent edges: e1 ends at the next vertex, e2 at the previous one
    let (next, prev) = ((vertex + 1) % 3, (vertex + 2) % 3);
    let e_next = prev; // edge opposite `prev` joins vertex and next
    // a mixed vertex takes its Dirichlet edge as θ = 0
    let first = if kind == VertexKind::Mixed && bc[e_next] != Bc::Dirichlet {
        prev
    } else {
        next
    };
    let other = if first == next { prev } else { next };
    let model = Model::new(m.kappa);
    let node = |v: usize| {
        let p = m.nodes[m.vertex_nodes[v]];
        model.to_norm(p[0], p[1])
    };
    let frame = model.frame(node(vertex), Some(node(first)));
    let w_other = frame.apply(node(other));
    let flip = if w_other.im < 0.0 { -1.0 } else { 1.0 };
    let loc = Locator::new(m);
    let trace = |r: f64| -> Result<Vec<f64>> {
        (0..SAMPLES)
            .map(|k| {
                let th = beta * (k as f64 + 0.5) / SAMPLES as f64;
                let w = model.to_norm(r * th.cos(), flip * r * th.sin());
                let (x, y) = model.from_norm(frame.invert(w));
                loc.interpolate(values, [x, y]).ok_or(Error::RadiiOutsideTriangle { vertex })
            })
            .collect()
    };
    let chord = |v: usize| {
        let (a, b) = (m.nodes[m.vertex_nodes[vertex]], m.nodes[m.vertex_nodes[v]]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    };
    if radii[1] > 0.5 * chord(next).min(chord(prev)) {
        return Err(Error::RadiiOutsideTriangle { vertex });
    }
    let traces = [trace(radii[0])?, trace(radii[1])?];
    let project = |tr: &[f64], f: &dyn Fn(f64) -> f64, norm: f64| -> f64 {
        let dth = beta / SAMPLES as f64;
        tr.iter()
            .enumerate()
            .map(|(k, u)| u * f(beta * (k as f64 + 0.5) / SAMPLES as f64) * dth)
            .sum::<f64>()
            / norm
    };
    // two-radius solve of c(r) = r^p (A + B r²)
    let solve = |c: [f64; 2], p: f64| -> (f64, f64, f64) {
        let y = [c[0] / radii[0].powf(p), c[1] / radii[1].powf(p)];
        let (s0, s1) = (radii[0].powi(2), radii[1].powi(2));
        let b = (y[1] - y[0]) / (s1 - s0);
        let a = y[0] - b * s0;
        (a, b, (a - y[0]).abs())
    };
    let (coefficients, uncertainty, radial_slope) = match kind {
        VertexKind::Neumann => {
            let c0 = traces.clone().map(|tr| project(&tr, &|_| 1.0, beta));
            let c1 = traces.clone().map(|tr| project(&tr, &|th| (nu * th).cos(), beta / 2.0));
            let (a0, slope, d0) = solve(c0, 0.0);
            let (a1, _, d1) = solve(c1, nu);
            (vec![a0, a1], vec![d0, d1], Some(slope))
        }
        VertexKind::Mixed => {
            let c = traces.clone().map(|tr| project(&tr, &|th| (0.5 * nu * th).sin(), beta / 2.0));
            let (b0, _, d) = solve(c, 0.5 * nu);
            (vec![b0], vec![d], None)
        }
        VertexKind::Dirichlet => {
            let c = traces.clone().map(|tr| project(&tr, &|th| (nu * th).sin(), beta / 2.0));
            let (c1, _, d) = solve(c, nu);
            (vec![c1], vec![d], None)
        }
    };
    Ok(VertexExpansion {
        vertex,
        kind,
        beta,
        nu,
        coefficients,
        uncertainty,
        radial_slope,
        radii,
    })
}
