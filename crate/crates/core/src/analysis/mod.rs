//! Post-processing of eigenvectors: recovered gradients, nodal sets,
//! critical points, Killing derivatives and vertex expansions.

mod critical;
mod derivative;
mod nodal;
mod recovery;
mod vertex;

pub use critical::{
    detect_critical_points, detect_critical_points_with, Continuum, CriticalCounts, CriticalKind,
    CriticalReport, CriticalTolerances, EdgeCritical, InteriorCritical,
};
pub use derivative::{certify_monotone, killing_derivative, killing_derivative_with, Certification, DerivativeField};
pub use nodal::{extract_nodal_set, extract_nodal_set_with, nodal_domains, EndTag, NodalEnd, NodalSet, NodalTopology};
pub use recovery::{recover_gradient, recover_gradient_unconstrained, recover_gradient_with, recover_with_hessian};
pub use vertex::{vertex_coefficients, vertex_coefficients_with, VertexExpansion};

use crate::mesh::TriangleMesh;
use crate::{Error, Result};

pub(crate) fn check_len(m: &TriangleMesh, v: &[f64]) -> Result<()> {
    if v.len() != m.n_nodes() {
        return Err(Error::ShapeMismatch(format!(
            "vector of length {}, mesh has {} nodes",
            v.len(),
            m.n_nodes()
        )));
    }
    Ok(())
}

/// Sorted node neighbor lists.
pub(crate) fn adjacency(m: &TriangleMesh) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); m.n_nodes()];
    for e in &m.elements {
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    adj[e[a]].push(e[b]);
                }
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Longest mesh edge at each triangle vertex.
pub(crate) fn vertex_sizes(m: &TriangleMesh, adj: &[Vec<usize>]) -> [f64; 3] {
    m.vertex_nodes.map(|v| adj[v].iter().map(|&u| dist(m.nodes[u], m.nodes[v])).fold(0.0, f64::max))
}

/// Bucket grid for point location in a mesh.
pub(crate) struct Locator<'a> {
    m: &'a TriangleMesh,
    lo: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> Locator<'a> {
    pub fn new(m: &'a TriangleMesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &m.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let per_side = ((m.elements.len() as f64).sqrt().ceil() as usize).clamp(1, 2048);
        let cell = span / per_side as f64;
        let dims = [
            ((hi[0] - lo[0]) / cell) as usize + 1,
            ((hi[1] - lo[1]) / cell) as usize + 1,
        ];
        let mut buckets = vec![Vec::new(); dims[0] * dims[1]];
        for (t, e) in m.elements.iter().enumerate() {
            let p = e.map(|i| m.nodes[i]);
            let (mut a, mut b) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for q in &p {
                for k in 0..2 {
                    a[k] = a[k].min(q[k]);
                    b[k] = b[k].max(q[k]);
                }
            }
            let i0 = ((a[0] - lo[0]) / cell) as usize;
            let i1 = (((b[0] - lo[0]) / cell) as usize).min(dims[0] - 1);
            let j0 = ((a[1] - lo[1]) / cell) as usize;
            let j1 = (((b[1] - lo[1]) / cell) as usize).min(dims[1] - 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[i * dims[1] + j].push(t);
                }
            }
        }
        Locator {
            m,
            lo,
            cell,
            dims,
            buckets,
        }
    }

    /// Element containing `p` with its barycentric coordinates.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let i = ((p[0] - self.lo[0]) / self.cell).floor();
        let j = ((p[1] - self.lo[1]) / self.cell).floor();
        if i < 0.0 || j < 0.0 || i as usize >= self.dims[0] || j as usize >= self.dims[1] {
            return None;
        }
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[i as usize * self.dims[1] + j as usize] {
            let l = barycentric(self.m.elements[t].map(|k| self.m.nodes[k]), p);
            let worst = l.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst >= -1e-10 && best.is_none_or(|b| worst > b.2) {
                best = Some((t, l, worst));
            }
        }
        best.map(|(t, l, _)| (t, l))
    }

    pub fn interpolate(&self, v: &[f64], p: [f64; 2]) -> Option<f64> {
        let (t, l) = self.locate(p)?;
        let e = self.m.elements[t];
        Some(l[0] * v[e[0]] + l[1] * v[e[1]] + l[2] * v[e[2]])
    }
}

pub(crate) fn barycentric(q: [[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let det = (q[1][0] - q[0][0]) * (q[2][1] - q[0][1]) - (q[1][1] - q[0][1]) * (q[2][0] - q[0][0]);
    let l1 = ((p[0] - q[0][0]) * (q[2][1] - q[0][1]) - (p[1] - q[0][1]) * (q[2][0] - q[0][0])) / det;
    let l2 = ((q[1][0] - q[0][0]) * (p[1] - q[0][1]) - (q[1][1] - q[0][1]) * (p[0] - q[0][0])) / det;
    [1.0 - l1 - l2, l1, l2]
}

#[cfg(test)]
mod tests;
