//! Graded Delaunay refinement of a geodesic triangle in the Poincaré chart.
//!
//! Boundary nodes sit exactly on the geodesic edges; interior nodes come from
//! circumcenter insertion. Encroached boundary subsegments are split before
//! any triangle, subsegments touching a corner are split on concentric
//! power-of-two shells, and skinny triangles wedged into a small corner are
//! left alone so the refinement terminates.

use std::collections::{HashMap, VecDeque};

use log::debug;

use super::arc::EdgeArc;
use super::delaunay::{orient, Delaunay, NONE};
use crate::error::{Error, Result};
use crate::geometry::{Mobius, Model};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// minimum-angle target in degrees
    pub min_angle_deg: f64,
    /// sweeps of quality-improving Laplacian smoothing
    pub smoothing_sweeps: usize,
    /// inradius over diameter below which a triangle is refined
    pub min_quality: f64,
    pub max_nodes: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            min_angle_deg: 32.0,
            smoothing_sweeps: 4,
            min_quality: 0.155,
            max_nodes: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NodeInfo {
    /// bit `i` set when the node lies on edge `i`
    pub mask: u8,
    /// arclength along the edge when on exactly one edge
    pub s: f64,
    pub corner: Option<usize>,
}

pub(crate) struct Raw {
    pub nodes: Vec<[f64; 2]>,
    pub info: Vec<NodeInfo>,
    pub elements: Vec<[usize; 3]>,
    pub boundary: Vec<([usize; 2], usize)>,
    pub corner_nodes: [usize; 3],
}

pub(crate) struct Sizing {
    pub h: f64,
    corners: [[f64; 2]; 3],
    radius: [f64; 3],
    grading: [f64; 3],
}

impl Sizing {
    pub fn new(h: f64, corners: [[f64; 2]; 3], grading: [f64; 3]) -> Self {
        let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let mut radius = [0.0; 3];
        for v in 0..3 {
            let c = corners[v];
            radius[v] = 0.5 * d(c, corners[(v + 1) % 3]).min(d(c, corners[(v + 2) % 3]));
        }
        Sizing {
            h,
            corners,
            radius,
            grading,
        }
    }

    /// Target element size at `p` in chart units.
    pub fn size(&self, p: [f64; 2]) -> f64 {
        let mut f: f64 = 1.0;
        for v in 0..3 {
            let g = self.grading[v];
            if g <= 1.0 {
                continue;
            }
            let rr = self.radius[v];
            let r = ((p[0] - self.corners[v][0]).powi(2) + (p[1] - self.corners[v][1]).powi(2)).sqrt();
            if r < rr {
                let fl = (self.h / rr).min(1.0).powf(g - 1.0);
                f = f.min((r / rr).powf(1.0 - 1.0 / g).max(fl));
            }
        }
        self.h * f
    }
}

struct Domain {
    model: Model,
    frames: [Mobius; 3],
}

impl Domain {
    /// Smallest signed frame height over the three edges; positive inside.
    fn depth(&self, p: [f64; 2]) -> f64 {
        let z = self.model.to_norm(p[0], p[1]);
        if self.model.eps != 0.0 && z.norm_sqr() >= 1.0 {
            return -1.0;
        }
        self.frames
            .iter()
            .map(|f| f.apply(z).im)
            .fold(f64::INFINITY, f64::min)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
}

/// Angles of triangle `abc` at `a`, `b`, `c`.
pub(crate) fn angles(p: [[f64; 2]; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let c = p[(i + 2) % 3];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        out[i] = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
    }
    out
}

fn seg_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Geodesic triangle with counterclockwise corners in the Poincaré chart.
pub(crate) struct Input {
    pub model: Model,
    pub corners: [[f64; 2]; 3],
    /// interior angle at each corner
    pub corner_angles: [f64; 3],
    pub arcs: [EdgeArc; 3],
}

/// Boundary nodes of edge `e` (from corner `e+1` to corner `e+2`), interior
/// arclength positions only.
fn boundary_positions(arc: &EdgeArc, sizing: &Sizing) -> Vec<f64> {
    let len = arc.len;
    let mut s: Vec<f64> = (0..=4096).map(|k| len * k as f64 / 4096.0).collect();
    for j in 0..=360 {
        let t = len * 2f64.powf(-(j as f64) / 8.0);
        s.push(t);
        s.push(len - t);
    }
    s.retain(|&x| (0.0..=len).contains(&x));
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    s.dedup();
    let g = |x: f64| arc.chart_speed(x) / sizing.size(arc.point(x)).max(1e-300);
    let mut cum = vec![0.0; s.len()];
    let mut prev = g(s[0]);
    for k in 1..s.len() {
        let cur = g(s[k]);
        cum[k] = cum[k - 1] + 0.5 * (prev + cur) * (s[k] - s[k - 1]);
        prev = cur;
    }
    let total = *cum.last().expect("samples");
    let n = (total - 1e-9).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    let mut k = 0;
    for j in 1..n {
        let target = total * j as f64 / n as f64;
        while cum[k + 1] < target {
            k += 1;
        }
        let f = (target - cum[k]) / (cum[k + 1] - cum[k]);
        out.push(s[k] + f * (s[k + 1] - s[k]));
    }
    out
}

pub(crate) fn refine_triangle(input: &Input, sizing: &Sizing, opts: &MeshOptions) -> Result<Raw> {
    let m = input.model;
    let corners = input.corners;
    // edge e runs from corner e+1 to corner e+2; frames put the interior on the left
    let frames = [0, 1, 2].map(|e| {
        let a = corners[(e + 1) % 3];
        let b = corners[(e + 2) % 3];
        m.frame(m.to_norm(a[0], a[1]), Some(m.to_norm(b[0], b[1])))
    });
    let dom = Domain { model: m, frames };

    // bounding box over sampled arcs
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for arc in &input.arcs {
        for k in 0..=64 {
            let p = arc.point(arc.len * k as f64 / 64.0);
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
    }
    let mut d = Delaunay::new(lo, hi);
    let mut info: Vec<NodeInfo> = vec![NodeInfo::default(); 3];
    let mut seg_adj: Vec<Vec<usize>> = vec![Vec::new(); 3];
    let mut segs: HashMap<(usize, usize), usize> = HashMap::new();

    let mut corner_ids = [0usize; 3];
    for v in 0..3 {
        let id = d
            .insert(corners[v])
            .ok_or_else(|| Error::MeshFailure("coincident corners".into()))?;
        corner_ids[v] = id;
        info.push(NodeInfo {
            mask: (1 << ((v + 1) % 3)) | (1 << ((v + 2) % 3)),
            s: 0.0,
            corner: Some(v),
        });
        seg_adj.push(Vec::new());
    }
    for e in 0..3 {
        let arc = &input.arcs[e];
        let mut chain = vec![corner_ids[(e + 1) % 3]];
        for s in boundary_positions(arc, sizing) {
            let p = arc.point(s);
            let id = d
                .insert(p)
                .ok_or_else(|| Error::MeshFailure("duplicate boundary node".into()))?;
            info.push(NodeInfo {
                mask: 1 << e,
                s,
                corner: None,
            });
            seg_adj.push(Vec::new());
            chain.push(id);
        }
        chain.push(corner_ids[(e + 2) % 3]);
        for w in chain.windows(2) {
            segs.insert(seg_key(w[0], w[1]), e);
            seg_adj[w[0]].push(w[1]);
            seg_adj[w[1]].push(w[0]);
        }
    }

    let small_corner = input.corner_angles.map(|a| a < std::f64::consts::PI / 4.0);
    let min_angle = opts.min_angle_deg.to_radians();

    let arc_s = |info: &[NodeInfo], v: usize, e: usize| -> f64 {
        match info[v].corner {
            Some(c) if c == (e + 1) % 3 => 0.0,
            Some(_) => input.arcs[e].len,
            None => info[v].s,
        }
    };

    // (a, b, forced): forced splits come from rejected circumcenters
    let mut seg_queue: VecDeque<(usize, usize, bool)> = {
        let mut v: Vec<_> = segs.keys().copied().collect();
        v.sort_unstable();
        v.into_iter().map(|(a, b)| (a, b, false)).collect()
    };
    let mut tri_queue: VecDeque<(usize, [usize; 3])> =
        d.live().map(|(i, t)| (i, t.v)).collect();
    let mut exempt: std::collections::HashSet<[usize; 3]> = Default::default();

    let encroached = |d: &Delaunay, a: usize, b: usize| -> bool {
        let et = d.edge_tris(a, b);
        if et.is_empty() {
            return true;
        }
        let (pa, pb) = (d.pts[a], d.pts[b]);
        et.iter().any(|&(_, c)| {
            let pc = d.pts[c];
            (pa[0] - pc[0]) * (pb[0] - pc[0]) + (pa[1] - pc[1]) * (pb[1] - pc[1]) < 0.0
        })
    };

    let mut inserted = 0usize;
    loop {
        if d.pts.len() > opts.max_nodes {
            return Err(Error::MeshFailure(format!(
                "node budget {} exceeded",
                opts.max_nodes
            )));
        }
        if let Some((a, b, forced)) = seg_queue.pop_front() {
            let key = seg_key(a, b);
            let Some(&e) = segs.get(&key) else { continue };
            if !forced && !encroached(&d, a, b) {
                continue;
            }
            // split point on the exact geodesic
            let (sa, sb) = (arc_s(&info, a, e), arc_s(&info, b, e));
            let ca = info[a].corner;
            let cb = info[b].corner;
            let s_new = match (ca, cb) {
                (Some(_), None) | (None, Some(_)) => {
                    let (sc, so, pc) = if ca.is_some() {
                        (sa, sb, d.pts[a])
                    } else {
                        (sb, sa, d.pts[b])
                    };
                    let dd = dist(pc, d.pts[if ca.is_some() { b } else { a }]);
                    let r = 2f64.powf(((dd / 2.0).log2()).round());
                    let (mut lo_s, mut hi_s) = (sc.min(so), sc.max(so));
                    for _ in 0..80 {
                        let mid = 0.5 * (lo_s + hi_s);
                        let closer = dist(input.arcs[e].point(mid), pc) < r;
                        // distance grows away from the corner
                        if closer == (sc < so) {
                            lo_s = mid;
                        } else {
                            hi_s = mid;
                        }
                    }
                    0.5 * (lo_s + hi_s)
                }
                _ => 0.5 * (sa + sb),
            };
            let p = input.arcs[e].point(s_new);
            let Some(nv) = d.insert(p) else {
                return Err(Error::MeshFailure("segment split hit an existing node".into()));
            };
            inserted += 1;
            info.push(NodeInfo {
                mask: 1 << e,
                s: s_new,
                corner: None,
            });
            seg_adj.push(Vec::new());
            segs.remove(&key);
            seg_adj[a].retain(|&x| x != b);
            seg_adj[b].retain(|&x| x != a);
            for (x, y) in [(a, nv), (nv, b)] {
                segs.insert(seg_key(x, y), e);
                seg_adj[x].push(y);
                seg_adj[y].push(x);
                seg_queue.push_back((x, y, false));
            }
            after_insert(&d, nv, &seg_adj, &mut seg_queue, &mut tri_queue);
            continue;
        }
        let Some((t, verts)) = tri_queue.pop_front() else { break };
        if !d.tris[t].alive || d.tris[t].v != verts || verts.iter().any(|&v| d.is_super(v)) {
            continue;
        }
        let p = verts.map(|v| d.pts[v]);
        let cen = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        if dom.depth(cen) <= 0.0 {
            continue;
        }
        let ang = angles(p);
        let lens = [dist(p[1], p[2]), dist(p[2], p[0]), dist(p[0], p[1])];
        let longest = lens.iter().cloned().fold(0.0, f64::max);
        let too_big = longest > sizing.size(cen) * (1.0 + 1e-9);
        let (imin, amin) = ang
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(i, a), (j, &b)| if b < a { (j, b) } else { (i, a) });
        let semi = 0.5 * (lens[0] + lens[1] + lens[2]);
        let quality = orient(p[0], p[1], p[2]) / 2.0 / semi / longest;
        let mut skinny = amin < min_angle || quality < opts.min_quality;
        if skinny {
            // shortest edge is opposite the smallest angle
            let u = verts[(imin + 1) % 3];
            let w = verts[(imin + 2) % 3];
            for v in 0..3 {
                if !small_corner[v] {
                    continue;
                }
                let e1 = 1u8 << ((v + 1) % 3);
                let e2 = 1u8 << ((v + 2) % 3);
                let (mu, mw) = (info[u].mask, info[w].mask);
                let wedged = (mu & e1 != 0 && mw & e2 != 0) || (mu & e2 != 0 && mw & e1 != 0);
                // a wedge is left alone only while its far vertex sits on the next shell
                let apex = d.pts[corner_ids[v]];
                let shell = dist(d.pts[u], apex).max(dist(d.pts[w], apex));
                let within = dist(d.pts[verts[imin]], apex) <= 2.0 * shell * (1.0 + 1e-6);
                if (wedged && within) || verts.contains(&corner_ids[v]) {
                    skinny = false;
                }
            }
        }
        if !(skinny || too_big) || exempt.contains(&verts) {
            continue;
        }
        let cc = circumcenter(p[0], p[1], p[2]);
        if !(dom.depth(cc) > 0.0) {
            // cannot happen while no subsegment is encroached; skip defensively
            debug!("circumcenter outside the domain, triangle left as is");
            exempt.insert(verts);
            continue;
        }
        let Some(cav) = d.cavity(cc) else {
            exempt.insert(verts);
            continue;
        };
        let mut hit = Vec::new();
        for &ct in &cav.tris {
            let tv = d.tris[ct].v;
            for i in 0..3 {
                let (x, y) = (tv[(i + 1) % 3], tv[(i + 2) % 3]);
                if !segs.contains_key(&seg_key(x, y)) {
                    continue;
                }
                let on_boundary = cav.boundary.iter().any(|&(a, b, _)| a == x && b == y);
                let (px, py) = (d.pts[x], d.pts[y]);
                let inside =
                    (px[0] - cc[0]) * (py[0] - cc[0]) + (px[1] - cc[1]) * (py[1] - cc[1]) < 0.0;
                if !on_boundary || inside {
                    hit.push(seg_key(x, y));
                }
            }
        }
        if !hit.is_empty() {
            hit.sort_unstable();
            hit.dedup();
            for (a, b) in hit {
                seg_queue.push_back((a, b, true));
            }
            tri_queue.push_back((t, verts));
            continue;
        }
        let nv = d.insert_into(cc, cav);
        inserted += 1;
        info.push(NodeInfo::default());
        seg_adj.push(Vec::new());
        after_insert(&d, nv, &seg_adj, &mut seg_queue, &mut tri_queue);
    }
    debug!("refinement inserted {inserted} nodes");

    // classify and collect
    let inside: Vec<bool> = d
        .tris
        .iter()
        .map(|t| {
            t.alive && !t.v.iter().any(|&v| v < 3) && {
                let p = t.v.map(|v| d.pts[v]);
                dom.depth([(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]) > 0.0
            }
        })
        .collect();
    let mut pts = d.pts.clone();
    if opts.smoothing_sweeps > 0 {
        smooth(&d, &mut pts, &inside, &info, sizing, opts.smoothing_sweeps);
    }
    let mut map = vec![NONE; pts.len()];
    let mut nodes = Vec::new();
    let mut ninfo = Vec::new();
    for (t, tri) in d.tris.iter().enumerate() {
        if !inside[t] {
            continue;
        }
        for &v in &tri.v {
            if map[v] == NONE {
                map[v] = 0;
            }
        }
    }
    for v in 0..pts.len() {
        if map[v] != NONE {
            map[v] = nodes.len();
            nodes.push(pts[v]);
            ninfo.push(info[v]);
        }
    }
    let mut elements = Vec::new();
    let mut boundary = Vec::new();
    let mut seen = 0usize;
    for (t, tri) in d.tris.iter().enumerate() {
        if !inside[t] {
            continue;
        }
        let q = tri.v.map(|v| pts[v]);
        let area = orient(q[0], q[1], q[2]);
        if area <= 0.0 {
            // a flat sliver spanning three nodes of one edge carries no area
            if tri.v.iter().all(|&v| info[v].mask != 0) {
                continue;
            }
            return Err(Error::MeshFailure("inverted element".into()));
        }
        elements.push(tri.v.map(|v| map[v]));
        for i in 0..3 {
            let nb = tri.n[i];
            if nb == NONE || !inside[nb] {
                let (x, y) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                match segs.get(&seg_key(x, y)) {
                    Some(&e) => {
                        boundary.push(([map[x], map[y]], e));
                        seen += 1;
                    }
                    None => {
                        return Err(Error::MeshFailure(
                            "domain boundary contains a non-boundary edge".into(),
                        ))
                    }
                }
            }
        }
    }
    if seen != segs.len() {
        return Err(Error::MeshFailure(format!(
            "{} of {} boundary subsegments recovered",
            seen,
            segs.len()
        )));
    }
    Ok(Raw {
        nodes,
        info: ninfo,
        elements,
        boundary,
        corner_nodes: corner_ids.map(|v| map[v]),
    })
}

fn after_insert(
    d: &Delaunay,
    nv: usize,
    seg_adj: &[Vec<usize>],
    seg_queue: &mut VecDeque<(usize, usize, bool)>,
    tri_queue: &mut VecDeque<(usize, [usize; 3])>,
) {
    let star = d.star(nv);
    let mut verts: Vec<usize> = Vec::new();
    for &t in &star {
        tri_queue.push_back((t, d.tris[t].v));
        verts.extend_from_slice(&d.tris[t].v);
    }
    verts.sort_unstable();
    verts.dedup();
    for u in verts {
        for &w in &seg_adj[u] {
            if u < w {
                seg_queue.push_back((u, w, false));
            }
        }
    }
}

/// Laplacian smoothing of interior nodes, accepted only when it improves the
/// smallest angle of the node's star.
fn smooth(
    d: &Delaunay,
    pts: &mut [[f64; 2]],
    inside: &[bool],
    info: &[NodeInfo],
    sizing: &Sizing,
    sweeps: usize,
) {
    let n = pts.len();
    let mut stars: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, tri) in d.tris.iter().enumerate() {
        if inside[t] {
            for &v in &tri.v {
                stars[v].push(t);
            }
        }
    }
    let min_angle_of = |pts: &[[f64; 2]], star: &[usize]| -> f64 {
        star.iter()
            .map(|&t| {
                let p = d.tris[t].v.map(|v| pts[v]);
                if orient(p[0], p[1], p[2]) <= 0.0 {
                    -1.0
                } else {
                    angles(p).iter().cloned().fold(f64::INFINITY, f64::min)
                }
            })
            .fold(f64::INFINITY, f64::min)
    };
    // a move may not push any star edge past the local target size
    let oversize = |pts: &[[f64; 2]], star: &[usize]| -> bool {
        star.iter().any(|&t| {
            let p = d.tris[t].v.map(|v| pts[v]);
            let cen = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
            let lim = sizing.size(cen) * (1.0 + 1e-9);
            (0..3).any(|i| {
                let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() > lim
            })
        })
    };
    for _ in 0..sweeps {
        for v in 3..n {
            if info[v].mask != 0 || stars[v].is_empty() {
                continue;
            }
            let mut nb: Vec<usize> = stars[v]
                .iter()
                .flat_map(|&t| d.tris[t].v)
                .filter(|&u| u != v)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            let k = nb.len() as f64;
            let avg = nb.iter().fold([0.0, 0.0], |a, &u| [a[0] + pts[u][0] / k, a[1] + pts[u][1] / k]);
            let before = min_angle_of(pts, &stars[v]);
            let old = pts[v];
            pts[v] = avg;
            if min_angle_of(pts, &stars[v]) <= before || oversize(pts, &stars[v]) {
                pts[v] = old;
            }
        }
    }
}
