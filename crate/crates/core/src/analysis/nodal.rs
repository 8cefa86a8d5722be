//! Zero-level sets of P1 functions.

use super::{adjacency, check_len, dist};
use crate::fem::EigenPair;
use crate::mesh::TriangleMesh;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndTag {
    Edge(usize),
    Vertex(usize),
}

impl EndTag {
    /// Edges whose closure contains the endpoint.
    pub fn edges(self) -> Vec<usize> {
        match self {
            EndTag::Edge(e) => vec![e],
            EndTag::Vertex(v) => vec![(v + 1) % 3, (v + 2) % 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalEnd {
    pub point: [f64; 2],
    pub tag: EndTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodalTopology {
    Empty,
    SimpleArc { ends: [NodalEnd; 2] },
    Loop,
    /// several components; degrees of the non-chain nodes of the union graph
    Graph { components: usize, degrees: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalSet {
    /// Poincaré chart chains
    pub polylines: Vec<Vec<[f64; 2]>>,
    /// element segments per component
    pub segments: Vec<usize>,
    pub topology: NodalTopology,
}

impl NodalSet {
    /// Whether a simple arc joins the closures of two distinct edges.
    pub fn ends_on_distinct_edges(&self) -> bool {
        match &self.topology {
            NodalTopology::SimpleArc { ends } => {
                let (a, b) = (ends[0].tag.edges(), ends[1].tag.edges());
                a.iter().any(|x| b.iter().any(|y| x != y))
            }
            _ => false,
        }
    }
}

/// Nodal values with exact zeros replaced by a tiny value carrying the sign
/// of the neighbor sum, so that every edge is either crossed or not.
pub(crate) fn effective(values: &[f64], adj: &[Vec<usize>]) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v != 0.0 {
                return v;
            }
            let s: f64 = adj[i].iter().map(|&j| values[j]).sum();
            if s < 0.0 {
                -f64::MIN_POSITIVE
            } else {
                f64::MIN_POSITIVE
            }
        })
        .collect()
}

pub fn extract_nodal_set(eig: &EigenPair, m: &TriangleMesh) -> NodalSet {
    extract_nodal_set_with(&eig.vector, m)
}

pub fn extract_nodal_set_with(values: &[f64], m: &TriangleMesh) -> NodalSet {
    if check_len(m, values).is_err() {
        return NodalSet {
            polylines: vec![],
            segments: vec![],
            topology: NodalTopology::Empty,
        };
    }
    let adj = adjacency(m);
    let v = effective(values, &adj);
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let crossing = |a: usize, b: usize| -> [f64; 2] {
        let t = v[a] / (v[a] - v[b]);
        let (p, q) = (m.nodes[a], m.nodes[b]);
        [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
    };
    // crossed mesh edge -> incident element segments
    let mut incid: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut segs: Vec<[(usize, usize); 2]> = Vec::new();
    for e in &m.elements {
        let mut cut = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (e[(k + 1) % 3], e[(k + 2) % 3]);
            if (v[a] > 0.0) != (v[b] > 0.0) {
                cut.push(key(a, b));
            }
        }
        if cut.len() == 2 {
            let id = segs.len();
            segs.push([cut[0], cut[1]]);
            for c in cut {
                incid.entry(c).or_default().push(id);
            }
        }
    }
    let boundary: HashMap<(usize, usize), usize> =
        m.boundary_edges.iter().map(|b| (key(b.nodes[0], b.nodes[1]), b.edge)).collect();
    let mut used = vec![false; segs.len()];
    let mut polylines = Vec::new();
    let mut counts = Vec::new();
    let mut ends: Vec<NodalEnd> = Vec::new();
    let mut loops = 0;
    // open chains start at crossed edges of degree one
    let starts: Vec<(usize, usize)> = incid
        .iter()
        .filter(|(_, s)| s.len() == 1)
        .map(|(&k, _)| k)
        .chain(incid.keys().copied())
        .collect();
    for start in starts {
        let Some(&s0) = incid[&start].iter().find(|&&s| !used[s]) else { continue };
        let open = incid[&start].len() == 1;
        let mut line = vec![crossing(start.0, start.1)];
        let (mut cur_edge, mut cur_seg) = (start, s0);
        let mut n = 0;
        loop {
            used[cur_seg] = true;
            n += 1;
            let [x, y] = segs[cur_seg];
            let next = if x == cur_edge { y } else { x };
            line.push(crossing(next.0, next.1));
            match incid[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => {
                    cur_edge = next;
                    cur_seg = s;
                }
                None => {
                    if open {
                        ends.push(end_of(m, &boundary, start, line[0]));
                        ends.push(end_of(m, &boundary, next, *line.last().expect("non-empty")));
                    } else {
                        loops += 1;
                    }
                    break;
                }
            }
        }
        polylines.push(line);
        counts.push(n);
    }
    let topology = match (polylines.len(), loops) {
        (0, _) => NodalTopology::Empty,
        (1, 1) => NodalTopology::Loop,
        (1, 0) => NodalTopology::SimpleArc { ends: [ends[0], ends[1]] },
        (c, _) => NodalTopology::Graph {
            components: c,
            degrees: vec![1; ends.len()],
        },
    };
    NodalSet {
        polylines,
        segments: counts,
        topology,
    }
}

fn end_of(m: &TriangleMesh, boundary: &HashMap<(usize, usize), usize>, edge: (usize, usize), p: [f64; 2]) -> NodalEnd {
    for (v, &node) in m.vertex_nodes.iter().enumerate() {
        if dist(p, m.nodes[node]) <= 0.5 * m.h || edge.0 == node || edge.1 == node {
            return NodalEnd {
                point: p,
                tag: EndTag::Vertex(v),
            };
        }
    }
    // an open chain can only end on the boundary
    let e = boundary.get(&edge).copied().unwrap_or(0);
    NodalEnd {
        point: p,
        tag: EndTag::Edge(e),
    }
}

/// Number of connected sign components of the nodal function.
pub fn nodal_domains(values: &[f64], m: &TriangleMesh) -> usize {
    let adj = adjacency(m);
    let v = effective(values, &adj);
    let mut seen = vec![false; v.len()];
    let mut count = 0;
    for s in 0..v.len() {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] && (v[j] > 0.0) == (v[i] > 0.0) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}
