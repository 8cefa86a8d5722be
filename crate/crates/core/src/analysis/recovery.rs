//! Polynomial-preserving gradient recovery: a least-squares quadratic over
//! the two-ring patch of each node, differentiated at the node. Patches of
//! boundary nodes are completed by reflection across the boundary geodesic,
//! with even data on Neumann edges and odd data on Dirichlet edges.

use super::{adjacency, check_len};
use crate::fem::EigenPair;
use crate::geometry::{Bc, Mobius, Model};
use crate::mesh::TriangleMesh;
use crate::Result;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Recovered gradient and Hessian at a node, chart components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet {
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl Jet {
    pub fn grad_norm(&self) -> f64 {
        self.grad[0].hypot(self.grad[1])
    }

    /// Frobenius norm of the Hessian.
    pub fn hess_norm(&self) -> f64 {
        let h = self.hess;
        (h[0][0].powi(2) + 2.0 * h[0][1].powi(2) + h[1][1].powi(2)).sqrt()
    }
}

pub fn recover_gradient(eig: &EigenPair, m: &TriangleMesh) -> Result<Vec<[f64; 2]>> {
    recover_gradient_with(&eig.vector, m, m.triangle.edge_bc)
}

pub fn recover_gradient_with(values: &[f64], m: &TriangleMesh, bc: [Bc; 3]) -> Result<Vec<[f64; 2]>> {
    Ok(jets(values, m, bc)?.into_iter().map(|j| j.grad).collect())
}

/// Recovery for data satisfying no boundary condition: boundary patches are
/// one-sided.
pub fn recover_gradient_unconstrained(values: &[f64], m: &TriangleMesh) -> Result<Vec<[f64; 2]>> {
    Ok(fit_all(values, m, None)?.into_iter().map(|j| j.grad).collect())
}

/// Gradient and Hessian of the local fits, node by node.
pub fn recover_with_hessian(values: &[f64], m: &TriangleMesh, bc: [Bc; 3]) -> Result<Vec<([f64; 2], [[f64; 2]; 2])>> {
    Ok(jets(values, m, bc)?.into_iter().map(|j| (j.grad, j.hess)).collect())
}

pub(crate) fn jets(values: &[f64], m: &TriangleMesh, bc: [Bc; 3]) -> Result<Vec<Jet>> {
    fit_all(values, m, Some(bc))
}

fn fit_all(values: &[f64], m: &TriangleMesh, bc: Option<[Bc; 3]>) -> Result<Vec<Jet>> {
    check_len(m, values)?;
    let adj = adjacency(m);
    let model = Model::new(m.kappa);
    let frames: [Mobius; 3] = [0, 1, 2].map(|e| {
        let (a, b) = crate::geometry::GeodesicTriangle::edge_vertices(e);
        let pa = m.nodes[m.vertex_nodes[a]];
        let pb = m.nodes[m.vertex_nodes[b]];
        model.frame(model.to_norm(pa[0], pa[1]), Some(model.to_norm(pb[0], pb[1])))
    });
    let out = (0..m.n_nodes())
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let mut patch: Vec<usize> = adj[i].clone();
            for &j in &adj[i] {
                patch.extend_from_slice(&adj[j]);
            }
            patch.sort_unstable();
            patch.dedup();
            let mut pts: Vec<([f64; 2], f64)> = patch.iter().map(|&j| (m.nodes[j], values[j])).collect();
            let mask = if bc.is_some() { m.node_edges[i] } else { 0 };
            for e in 0..3 {
                if mask & (1 << e) == 0 {
                    continue;
                }
                let sign = match bc {
                    Some(b) if b[e] == Bc::Dirichlet => -1.0,
                    _ => 1.0,
                };
                let fr = &frames[e];
                for &j in &patch {
                    let q = m.nodes[j];
                    let r = fr.invert(fr.apply(model.to_norm(q[0], q[1])).conj());
                    let (x, y) = model.from_norm(r);
                    pts.push(([x, y], sign * values[j]));
                }
            }
            fit(m.nodes[i], &pts)
        })
        .collect();
    Ok(out)
}

fn fit(c: [f64; 2], pts: &[([f64; 2], f64)]) -> Jet {
    let s = pts
        .iter()
        .map(|(p, _)| (p[0] - c[0]).hypot(p[1] - c[1]))
        .fold(0.0, f64::max)
        .max(1e-300);
    let n = pts.len();
    let a = DMatrix::from_fn(n, 6, |r, k| {
        let x = (pts[r].0[0] - c[0]) / s;
        let y = (pts[r].0[1] - c[1]) / s;
        [1.0, x, y, x * x, x * y, y * y][k]
    });
    let b = DVector::from_iterator(n, pts.iter().map(|p| p.1));
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(6));
    Jet {
        grad: [coef[1] / s, coef[2] / s],
        hess: [
            [2.0 * coef[3] / (s * s), coef[4] / (s * s)],
            [coef[4] / (s * s), 2.0 * coef[5] / (s * s)],
        ],
    }
}
