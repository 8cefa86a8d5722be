//! Interior and edge critical points of P1 eigenfunctions.
//!
//! Interior candidates come from two sources: elements in which the linear
//! interpolant of the recovered gradient vanishes, and nodes whose recovered
//! gradient is small both globally and relative to the local Hessian over
//! one element. Candidates are clustered over the mesh graph; long clusters
//! are critical continua. Near a vertex of large expansion exponent the
//! gradient decays like a high power of the distance, so a bare magnitude
//! threshold would flag whole corner wedges; the Hessian test rejects them.

use super::recovery::{jets, Jet};
use super::{adjacency, barycentric, check_len, dist, vertex_sizes};
use crate::fem::EigenPair;
use crate::geometry::{Bc, GeodesicTriangle};
use crate::mesh::TriangleMesh;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Clusters longer than this many `h` are continua.
const CONTINUUM_FACTOR: f64 = 10.0;
/// Exclusion radius in units of the local element size at the vertex.
const EXCLUSION_FACTOR: f64 = 3.0;
/// Gradient may not exceed this fraction of |Hessian|·(element size).
const HESSIAN_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Min,
    Max,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorCritical {
    pub location: [f64; 2],
    pub gradient: f64,
    pub kind: CriticalKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCritical {
    pub location: [f64; 2],
    pub edge: usize,
    /// arclength from the edge's first vertex
    pub s: f64,
    /// +1 when the tangential derivative goes from negative to positive
    pub sign_change: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Continuum {
    /// parent edge when most of the cluster lies on one edge
    pub edge: Option<usize>,
    pub diameter: f64,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalCounts {
    pub interior: usize,
    pub edge: usize,
    pub continua: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalTolerances {
    pub gradient: f64,
    pub exclusion_radius: [f64; 3],
    pub continuum_diameter: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub interior_points: Vec<InteriorCritical>,
    pub edge_points: Vec<EdgeCritical>,
    pub continua: Vec<Continuum>,
    pub counts: CriticalCounts,
    pub tolerances: CriticalTolerances,
}

impl CriticalReport {
    pub fn total(&self) -> usize {
        self.counts.interior + self.counts.edge
    }

    pub fn has_continuum_on(&self, edge: usize) -> bool {
        self.continua.iter().any(|c| c.edge == Some(edge))
    }
}

/// `tol` is relative to the largest recovered gradient (default 1e-3).
pub fn detect_critical_points(eig: &EigenPair, m: &TriangleMesh, tol: Option<f64>) -> Result<CriticalReport> {
    detect_critical_points_with(&eig.vector, m, m.triangle.edge_bc, tol)
}

pub fn detect_critical_points_with(
    values: &[f64],
    m: &TriangleMesh,
    bc: [Bc; 3],
    tol: Option<f64>,
) -> Result<CriticalReport> {
    check_len(m, values)?;
    let adj = adjacency(m);
    let jet = jets(values, m, bc)?;
    let gmax = jet.iter().map(Jet::grad_norm).fold(0.0, f64::max);
    let gtol = tol.unwrap_or(1e-3) * gmax;
    let sizes = vertex_sizes(m, &adj);
    let r_excl = sizes.map(|s| EXCLUSION_FACTOR * s);
    let excluded = |p: [f64; 2]| (0..3).any(|v| dist(p, m.nodes[m.vertex_nodes[v]]) < r_excl[v]);
    let local_size: Vec<f64> = (0..m.n_nodes())
        .map(|i| adj[i].iter().map(|&j| dist(m.nodes[i], m.nodes[j])).fold(0.0, f64::max))
        .collect();
    let n = m.n_nodes();
    let mut flagged = vec![false; n];
    for i in 0..n {
        let j = &jet[i];
        if gmax > 0.0
            && !excluded(m.nodes[i])
            && j.grad_norm() < gtol
            && j.grad_norm() <= HESSIAN_RATIO * j.hess_norm() * local_size[i]
        {
            flagged[i] = true;
        }
    }
    // elements where the interpolated gradient vanishes
    let mut zero_at: Vec<Option<[f64; 2]>> = vec![None; m.elements.len()];
    if gmax > 0.0 {
        for (t, e) in m.elements.iter().enumerate() {
            let p = e.map(|i| m.nodes[i]);
            let g = e.map(|i| jet[i].grad);
            if let Some(z) = gradient_zero(p, g) {
                if !excluded(z) {
                    zero_at[t] = Some(z);
                    for &i in e {
                        flagged[i] = true;
                    }
                }
            }
        }
    }
    let mut elem_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, e) in m.elements.iter().enumerate() {
        if zero_at[t].is_some() {
            for &i in e {
                elem_of[i].push(t);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut interior_points = Vec::new();
    let mut continua = Vec::new();
    let mut in_continuum = vec![false; n];
    let continuum_diameter = CONTINUUM_FACTOR * m.h;
    for s in 0..n {
        if !flagged[s] || seen[s] {
            continue;
        }
        let mut cluster = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < cluster.len() {
            let i = cluster[k];
            k += 1;
            for &j in &adj[i] {
                if flagged[j] && !seen[j] {
                    seen[j] = true;
                    cluster.push(j);
                }
            }
        }
        cluster.sort_unstable();
        let diameter = cluster_diameter(m, &cluster);
        if diameter > continuum_diameter {
            let mut per_edge = [0usize; 3];
            for &i in &cluster {
                for (e, c) in per_edge.iter_mut().enumerate() {
                    if m.node_edges[i] & (1 << e) != 0 {
                        *c += 1;
                    }
                }
            }
            let (e, c) = per_edge.iter().enumerate().max_by_key(|&(e, &c)| (c, usize::MAX - e)).expect("three edges");
            for &i in &cluster {
                in_continuum[i] = true;
            }
            continua.push(Continuum {
                edge: (2 * *c >= cluster.len()).then_some(e),
                diameter,
                nodes: cluster,
            });
            continue;
        }
        if cluster.iter().any(|&i| m.is_boundary(i)) {
            // boundary-touching clusters are the edge search's business
            continue;
        }
        let zeros: Vec<[f64; 2]> = {
            let mut ts: Vec<usize> = cluster.iter().flat_map(|&i| elem_of[i].iter().copied()).collect();
            ts.sort_unstable();
            ts.dedup();
            ts.iter().filter_map(|&t| zero_at[t]).collect()
        };
        let best = *cluster
            .iter()
            .min_by(|&&a, &&b| jet[a].grad_norm().total_cmp(&jet[b].grad_norm()))
            .expect("non-empty");
        let j = &jet[best];
        let newton = newton_step(j);
        let location = match (zeros.is_empty(), newton) {
            (false, _) => {
                let k = zeros.len() as f64;
                zeros.iter().fold([0.0, 0.0], |a, z| [a[0] + z[0] / k, a[1] + z[1] / k])
            }
            (true, Some(d)) if d[0].hypot(d[1]) <= local_size[best] => {
                [m.nodes[best][0] + d[0], m.nodes[best][1] + d[1]]
            }
            _ => continue,
        };
        interior_points.push(InteriorCritical {
            location,
            gradient: j.grad_norm(),
            kind: classify(j),
        });
    }
    let edge_points = edge_search(m, bc, &jet, values, &in_continuum, &r_excl, gmax);
    let counts = CriticalCounts {
        interior: interior_points.len(),
        edge: edge_points.len(),
        continua: continua.len(),
    };
    Ok(CriticalReport {
        interior_points,
        edge_points,
        continua,
        counts,
        tolerances: CriticalTolerances {
            gradient: gtol,
            exclusion_radius: r_excl,
            continuum_diameter,
            h: m.h,
        },
    })
}

/// Zero of the linear interpolant of `g` inside the closed element.
fn gradient_zero(p: [[f64; 2]; 3], g: [[f64; 2]; 3]) -> Option<[f64; 2]> {
    // g(λ) = g0 + λ1 (g1 - g0) + λ2 (g2 - g0)
    let a = [[g[1][0] - g[0][0], g[2][0] - g[0][0]], [g[1][1] - g[0][1], g[2][1] - g[0][1]]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = g.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
    if det.abs() <= 1e-14 * scale * scale || scale == 0.0 {
        return None;
    }
    let l1 = (-g[0][0] * a[1][1] + g[0][1] * a[0][1]) / det;
    let l2 = (-a[0][0] * g[0][1] + a[1][0] * g[0][0]) / det;
    let l0 = 1.0 - l1 - l2;
    if l0 < -1e-12 || l1 < -1e-12 || l2 < -1e-12 {
        return None;
    }
    let x = l0 * p[0][0] + l1 * p[1][0] + l2 * p[2][0];
    let y = l0 * p[0][1] + l1 * p[1][1] + l2 * p[2][1];
    debug_assert!(barycentric(p, [x, y]).iter().all(|&l| l > -1e-9));
    Some([x, y])
}

fn newton_step(j: &Jet) -> Option<[f64; 2]> {
    let h = j.hess;
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if det.abs() <= 1e-14 * j.hess_norm().powi(2) || det == 0.0 {
        return None;
    }
    let g = j.grad;
    Some([(-h[1][1] * g[0] + h[0][1] * g[1]) / det, (h[1][0] * g[0] - h[0][0] * g[1]) / det])
}

fn classify(j: &Jet) -> CriticalKind {
    let h = j.hess;
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let tr = h[0][0] + h[1][1];
    if det.abs() <= 1e-6 * j.hess_norm().powi(2) {
        CriticalKind::Degenerate
    } else if det < 0.0 {
        CriticalKind::Saddle
    } else if tr > 0.0 {
        CriticalKind::Min
    } else {
        CriticalKind::Max
    }
}

fn cluster_diameter(m: &TriangleMesh, c: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (a, &i) in c.iter().enumerate() {
        for &j in &c[a + 1..] {
            d = d.max(dist(m.nodes[i], m.nodes[j]));
        }
    }
    d
}

/// Sign changes of the tangential derivative along Neumann edges, outside
/// the vertex exclusion zones and continua. Runs of sign changes closer
/// than three local element sizes are merged: an odd run is one critical
/// point, an even run cancels.
fn edge_search(
    m: &TriangleMesh,
    bc: [Bc; 3],
    jet: &[Jet],
    values: &[f64],
    in_continuum: &[bool],
    r_excl: &[f64; 3],
    gmax: f64,
) -> Vec<EdgeCritical> {
    let arcs = m.edge_arcs();
    let mut out = Vec::new();
    for e in 0..3 {
        if bc[e] != Bc::Neumann {
            continue;
        }
        let arc = &arcs[e];
        let (va, vb) = GeodesicTriangle::edge_vertices(e);
        let (pa, pb) = (m.nodes[m.vertex_nodes[va]], m.nodes[m.vertex_nodes[vb]]);
        let mut nodes: Vec<(f64, usize)> = (0..m.n_nodes())
            .filter(|&i| m.node_edges[i] & (1 << e) != 0)
            .filter(|&i| dist(m.nodes[i], pa) >= r_excl[va] && dist(m.nodes[i], pb) >= r_excl[vb])
            .map(|i| (arc.param(m.nodes[i]), i))
            .collect();
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let tangent = |s: f64| {
            let d = 1e-7 * arc.len;
            let (p, q) = (arc.point(s - d), arc.point(s + d));
            let l = dist(p, q);
            [(q[0] - p[0]) / l, (q[1] - p[1]) / l]
        };
        let t: Vec<f64> = nodes
            .iter()
            .map(|&(s, i)| {
                let tau = tangent(s);
                jet[i].grad[0] * tau[0] + jet[i].grad[1] * tau[1]
            })
            .collect();
        let floor = 1e-10 * gmax;
        let mut changes: Vec<(usize, i8)> = Vec::new();
        for k in 0..nodes.len().saturating_sub(1) {
            let (i, j) = (nodes[k].1, nodes[k + 1].1);
            if in_continuum[i] || in_continuum[j] {
                continue;
            }
            if t[k] * t[k + 1] < 0.0 && t[k].abs().max(t[k + 1].abs()) > floor {
                changes.push((k, if t[k] < 0.0 { 1 } else { -1 }));
            }
        }
        let mut run: Vec<(usize, i8)> = Vec::new();
        let flush = |run: &mut Vec<(usize, i8)>, out: &mut Vec<EdgeCritical>| {
            if run.len() % 2 == 1 {
                let (k, sign) = run[run.len() / 2];
                let s = edge_root(&nodes, &t, values, k);
                out.push(EdgeCritical {
                    location: arc.point(s),
                    edge: e,
                    s,
                    sign_change: sign,
                });
            }
            run.clear();
        };
        for &(k, sign) in &changes {
            if let Some(&(k0, _)) = run.last() {
                let gap = nodes[k].0 - nodes[k0 + 1].0;
                let near = 3.0 * dist(m.nodes[nodes[k].1], m.nodes[nodes[k + 1].1]).max(1e-300);
                if gap.abs() > near {
                    flush(&mut run, &mut out);
                }
            }
            run.push((k, sign));
        }
        flush(&mut run, &mut out);
    }
    out
}

/// Root of the tangential derivative between nodes `k` and `k+1`: derivative
/// of a least-squares quadratic in arclength through up to four nearby
/// traces, falling back to linear interpolation of the derivative.
fn edge_root(nodes: &[(f64, usize)], t: &[f64], values: &[f64], k: usize) -> f64 {
    let (s0, s1) = (nodes[k].0, nodes[k + 1].0);
    let lin = s0 + (s1 - s0) * t[k] / (t[k] - t[k + 1]);
    let lo = k.saturating_sub(1);
    let hi = (k + 3).min(nodes.len());
    if hi - lo >= 3 {
        let c = 0.5 * (s0 + s1);
        let w = (s1 - s0).abs().max(1e-300);
        let rows: Vec<(f64, f64)> = (lo..hi).map(|i| ((nodes[i].0 - c) / w, values[nodes[i].1])).collect();
        let a = nalgebra::DMatrix::from_fn(rows.len(), 3, |r, j| rows[r].0.powi(j as i32));
        let b = nalgebra::DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
        if let Ok(x) = a.svd(true, true).solve(&b, 1e-12) {
            if x[2].abs() > 0.0 {
                let root = c - w * x[1] / (2.0 * x[2]);
                if (root - s0) * (root - s1) <= 0.0 {
                    return root;
                }
            }
        }
    }
    lin
}
