//! Graded triangulations of geodesic triangles in the Poincaré chart.

mod arc;
mod delaunay;
mod generate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    chart_convert, classify_triangle, rho, Chart, ChartPoint, Curvature, GeodesicTriangle,
    VertexKind,
};
use crate::quadrature::{SEVEN_POINT, THREE_POINT};
pub(crate) use arc::EdgeArc;
pub use generate::MeshOptions;
use generate::{Input, Sizing};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    /// endpoints in the counterclockwise order of the owning element
    pub nodes: [usize; 2],
    /// index of the triangle edge (opposite vertex of that index)
    pub edge: usize,
}

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub kappa: Curvature,
    /// Poincaré-chart coordinates
    pub nodes: Vec<[f64; 2]>,
    /// counterclockwise node triples
    pub elements: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// node index of each triangle vertex
    pub vertex_nodes: [usize; 3],
    pub h: f64,
    pub grading: [f64; 3],
    pub triangle: GeodesicTriangle,
    /// bit `i` set when the node lies on triangle edge `i`
    pub node_edges: Vec<u8>,
    /// Klein-chart coordinates of the nodes
    pub klein: Vec<[f64; 2]>,
    /// number of quadrisections applied after generation
    pub level: usize,
}

/// Per-vertex grading: `grading` at obtuse and mixed vertices, 1 elsewhere.
pub fn default_grading(t: &GeodesicTriangle, grading: f64) -> [f64; 3] {
    let mut g = [1.0; 3];
    for v in 0..3 {
        let obtuse = t.angles[v] > std::f64::consts::FRAC_PI_2 + crate::geometry::ANGLE_TOL;
        if obtuse || t.vertex_kind(v) == VertexKind::Mixed {
            g[v] = grading;
        }
    }
    g
}

/// Mesh of `t` with target size `h` (Poincaré chart units) and the default
/// grading rule.
pub fn generate(t: &GeodesicTriangle, h: f64, grading: f64) -> Result<TriangleMesh> {
    if !(grading >= 1.0) {
        return Err(Error::MeshFailure(format!("grading {grading} below 1")));
    }
    generate_with(t, h, default_grading(t, grading), &MeshOptions::default())
}

pub fn generate_with(
    t: &GeodesicTriangle,
    h: f64,
    grading: [f64; 3],
    opts: &MeshOptions,
) -> Result<TriangleMesh> {
    if grading.iter().any(|&g| !(g >= 1.0)) {
        return Err(Error::MeshFailure("grading exponents must be at least 1".into()));
    }
    let kappa = t.kappa;
    let mut pc = [[0.0; 2]; 3];
    for (q, v) in pc.iter_mut().zip(&t.vertices) {
        let p = chart_convert(*v, Chart::PoincareDisk, kappa)?;
        *q = [p.x, p.y];
    }
    let min_side = (0..3)
        .map(|i| {
            let (a, b) = (pc[(i + 1) % 3], pc[(i + 2) % 3]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    if !(h > 0.0 && h <= min_side / 4.0 * (1.0 + 1e-12)) {
        return Err(Error::MeshFailure(format!(
            "h = {h} outside (0, {}]",
            min_side / 4.0
        )));
    }
    // internal counterclockwise order
    let perm = if t.is_ccw() { [0, 1, 2] } else { [0, 2, 1] };
    let corners = perm.map(|i| pc[i]);
    let arcs = [0, 1, 2].map(|e| EdgeArc::new(kappa, corners[(e + 1) % 3], corners[(e + 2) % 3]));
    let input = Input {
        model: crate::geometry::Model::new(kappa),
        corners,
        corner_angles: perm.map(|i| t.angles[i]),
        arcs,
    };
    let sizing = Sizing::new(h, corners, perm.map(|i| grading[i]));
    let raw = generate::refine_triangle(&input, &sizing, opts)?;
    let mut vertex_nodes = [0; 3];
    for (k, &i) in perm.iter().enumerate() {
        vertex_nodes[i] = raw.corner_nodes[k];
    }
    let remap_mask = |m: u8| -> u8 {
        (0..3).fold(0u8, |acc, k| if m & (1 << k) != 0 { acc | (1 << perm[k]) } else { acc })
    };
    let node_edges: Vec<u8> = raw.info.iter().map(|i| remap_mask(i.mask)).collect();
    let boundary_edges = raw
        .boundary
        .iter()
        .map(|&(nodes, e)| BoundaryEdge {
            nodes,
            edge: perm[e],
        })
        .collect();
    let mut mesh = TriangleMesh {
        kappa,
        klein: Vec::new(),
        nodes: raw.nodes,
        elements: raw.elements,
        boundary_edges,
        vertex_nodes,
        h,
        grading,
        triangle: t.clone(),
        node_edges,
        level: 0,
    };
    mesh.klein = mesh.compute_klein()?;
    // corners exactly as given
    for v in 0..3 {
        mesh.nodes[mesh.vertex_nodes[v]] = pc[v];
    }
    Ok(mesh)
}

/// Uniform quadrisection; new boundary nodes are placed on the exact
/// geodesic edges.
pub fn refine(m: &TriangleMesh) -> Result<TriangleMesh> {
    let arcs = m.edge_arcs();
    let mut nodes = m.nodes.clone();
    let mut node_edges = m.node_edges.clone();
    let mut edge_tag: HashMap<(usize, usize), usize> = HashMap::new();
    for b in &m.boundary_edges {
        edge_tag.insert(key(b.nodes[0], b.nodes[1]), b.edge);
    }
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>, ne: &mut Vec<u8>| -> usize {
        let k = key(a, b);
        if let Some(&i) = mid.get(&k) {
            return i;
        }
        let p = match edge_tag.get(&k) {
            Some(&e) => {
                let arc = &arcs[e];
                let s = 0.5 * (arc.param(nodes[a]) + arc.param(nodes[b]));
                ne.push(1 << e);
                arc.point(s)
            }
            None => {
                ne.push(0);
                [0.5 * (nodes[a][0] + nodes[b][0]), 0.5 * (nodes[a][1] + nodes[b][1])]
            }
        };
        nodes.push(p);
        let i = nodes.len() - 1;
        mid.insert(k, i);
        i
    };
    let mut elements = Vec::with_capacity(4 * m.elements.len());
    for &[a, b, c] in &m.elements {
        let ab = midpoint(a, b, &mut nodes, &mut node_edges);
        let bc = midpoint(b, c, &mut nodes, &mut node_edges);
        let ca = midpoint(c, a, &mut nodes, &mut node_edges);
        elements.push([a, ab, ca]);
        elements.push([ab, b, bc]);
        elements.push([ca, bc, c]);
        elements.push([ab, bc, ca]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * m.boundary_edges.len());
    for be in &m.boundary_edges {
        let [a, b] = be.nodes;
        let mm = mid[&key(a, b)];
        boundary_edges.push(BoundaryEdge {
            nodes: [a, mm],
            edge: be.edge,
        });
        boundary_edges.push(BoundaryEdge {
            nodes: [mm, b],
            edge: be.edge,
        });
    }
    let mut out = TriangleMesh {
        kappa: m.kappa,
        nodes,
        elements,
        boundary_edges,
        vertex_nodes: m.vertex_nodes,
        h: m.h / 2.0,
        grading: m.grading,
        triangle: m.triangle.clone(),
        node_edges,
        klein: Vec::new(),
        level: m.level + 1,
    };
    if out.elements.iter().any(|e| out.signed_area(e) <= 0.0) {
        return Err(Error::MeshFailure("quadrisection inverted an element".into()));
    }
    out.klein = out.compute_klein()?;
    Ok(out)
}

/// Meshes `generate(h)` followed by `levels - 1` quadrisections.
pub fn ladder(t: &GeodesicTriangle, h: f64, grading: f64, levels: usize) -> Result<Vec<TriangleMesh>> {
    let mut out = vec![generate(t, h, grading)?];
    for _ in 1..levels {
        let next = refine(out.last().expect("non-empty"))?;
        out.push(next);
    }
    Ok(out)
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl TriangleMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn edge_arcs(&self) -> [EdgeArc; 3] {
        [0, 1, 2].map(|e| {
            let (a, b) = GeodesicTriangle::edge_vertices(e);
            EdgeArc::new(
                self.kappa,
                self.nodes[self.vertex_nodes[a]],
                self.nodes[self.vertex_nodes[b]],
            )
        })
    }

    fn compute_klein(&self) -> Result<Vec<[f64; 2]>> {
        self.nodes
            .iter()
            .map(|p| {
                let q = chart_convert(ChartPoint::poincare(p[0], p[1]), Chart::Klein, self.kappa)?;
                Ok([q.x, q.y])
            })
            .collect()
    }

    pub fn point(&self, i: usize) -> ChartPoint {
        ChartPoint::poincare(self.nodes[i][0], self.nodes[i][1])
    }

    pub fn signed_area(&self, e: &[usize; 3]) -> f64 {
        let [a, b, c] = e.map(|i| self.nodes[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.node_edges[i] != 0
    }

    pub fn is_vertex(&self, i: usize) -> Option<usize> {
        self.vertex_nodes.iter().position(|&v| v == i)
    }

    /// Same node set and connectivity, nodes fixed in the Klein chart and
    /// re-mapped to the Poincaré chart at curvature `kappa`.
    pub fn with_curvature(&self, kappa: Curvature) -> Result<TriangleMesh> {
        let verts = self.triangle.klein().map(|[x, y]| ChartPoint::klein(x, y));
        let triangle = GeodesicTriangle::new(kappa, verts, self.triangle.edge_bc)?;
        let mut nodes = Vec::with_capacity(self.klein.len());
        for k in &self.klein {
            let p = chart_convert(ChartPoint::klein(k[0], k[1]), Chart::PoincareDisk, kappa)?;
            nodes.push([p.x, p.y]);
        }
        let out = TriangleMesh {
            kappa,
            nodes,
            triangle,
            klein: self.klein.clone(),
            ..self.clone()
        };
        if out.elements.iter().any(|e| out.signed_area(e) <= 0.0) {
            return Err(Error::MeshFailure(format!(
                "element inverted after re-mapping to curvature {}",
                kappa.value()
            )));
        }
        Ok(out)
    }

    /// Total area under the metric area form (degree-5 quadrature).
    pub fn metric_area(&self) -> f64 {
        let ell = self.kappa.ell();
        let mut total = 0.0;
        for e in &self.elements {
            let area = self.signed_area(e);
            let p = e.map(|i| self.nodes[i]);
            let rule = if ell == 0.0 { &THREE_POINT } else { &SEVEN_POINT };
            let mut s = 0.0;
            for (b, w) in rule.points.iter().zip(rule.weights) {
                let x = b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0];
                let y = b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1];
                s += w * rho(ell, x * x + y * y);
            }
            total += s * area;
        }
        total
    }

    /// Inradius over diameter for each element.
    pub fn qualities(&self) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| {
                let p = e.map(|i| self.nodes[i]);
                let l = [0, 1, 2].map(|i| {
                    let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
                });
                let s = 0.5 * (l[0] + l[1] + l[2]);
                self.signed_area(e) / s / l[0].max(l[1]).max(l[2])
            })
            .collect()
    }

    pub fn min_quality(&self) -> f64 {
        self.qualities().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_diameter(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| {
                let p = e.map(|i| self.nodes[i]);
                (0..3)
                    .map(|i| {
                        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Structural checks: orientation, conformity, boundary closure.
    pub fn validate(&self) -> Result<()> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.elements {
            if self.signed_area(e) <= 0.0 {
                return Err(Error::MeshFailure("non-positive element".into()));
            }
            for i in 0..3 {
                *count.entry(key(e[i], e[(i + 1) % 3])).or_default() += 1;
            }
        }
        let bset: HashMap<(usize, usize), usize> = self
            .boundary_edges
            .iter()
            .map(|b| (key(b.nodes[0], b.nodes[1]), b.edge))
            .collect();
        for (k, &c) in &count {
            let on_b = bset.contains_key(k);
            if (on_b && c != 1) || (!on_b && c != 2) {
                return Err(Error::MeshFailure(format!("edge {k:?} used {c} times")));
            }
        }
        if bset.len() != self.boundary_edges.len() {
            return Err(Error::MeshFailure("repeated boundary edge".into()));
        }
        Ok(())
    }

    /// Classification of the triangle this mesh discretizes.
    pub fn triangle_class(&self) -> crate::geometry::TriangleClass {
        classify_triangle(&self.triangle)
    }

    pub fn dump(&self) -> MeshDump {
        MeshDump {
            nodes: self.nodes.clone(),
            elements: self.elements.clone(),
            boundary: self
                .boundary_edges
                .iter()
                .map(|b| [b.nodes[0], b.nodes[1], b.edge])
                .collect(),
        }
    }
}

/// Serialized mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDump {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 3]>,
    pub boundary: Vec<[usize; 3]>,
}
