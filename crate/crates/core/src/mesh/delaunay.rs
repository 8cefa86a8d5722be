//! Incremental Bowyer–Watson Delaunay triangulation with exact predicates.

use robust::{incircle, orient2d, Coord};

pub(crate) const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tri {
    /// counterclockwise vertices
    pub v: [usize; 3],
    /// `n[i]` is the neighbor across the edge opposite `v[i]`
    pub n: [usize; 3],
    pub alive: bool,
}

pub(crate) struct Delaunay {
    pub pts: Vec<[f64; 2]>,
    pub tris: Vec<Tri>,
    free: Vec<usize>,
    /// one live triangle incident to each vertex
    vert_tri: Vec<usize>,
    hint: usize,
    /// scratch marks for cavity search
    mark: Vec<u32>,
    stamp: u32,
}

#[inline]
fn c(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

pub(crate) fn orient(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    orient2d(c(a), c(b), c(p))
}

/// Outcome of a cavity computation for a prospective point.
pub(crate) struct Cavity {
    pub tris: Vec<usize>,
    /// boundary edges `(a, b, outside neighbor)` in counterclockwise order of the cavity triangle
    pub boundary: Vec<(usize, usize, usize)>,
}

impl Delaunay {
    /// Triangulation seeded with a super-triangle enclosing the box.
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        let d = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12) * 20.0;
        let pts = vec![[cx - 2.0 * d, cy - d], [cx + 2.0 * d, cy - d], [cx, cy + 2.0 * d]];
        let tris = vec![Tri {
            v: [0, 1, 2],
            n: [NONE; 3],
            alive: true,
        }];
        Delaunay {
            pts,
            tris,
            free: Vec::new(),
            vert_tri: vec![0, 0, 0],
            hint: 0,
            mark: vec![0],
            stamp: 0,
        }
    }

    pub fn is_super(&self, v: usize) -> bool {
        v < 3
    }

    fn tri_pts(&self, t: usize) -> [[f64; 2]; 3] {
        let v = self.tris[t].v;
        [self.pts[v[0]], self.pts[v[1]], self.pts[v[2]]]
    }

    /// Live triangle containing `p` (closed), by a visibility walk.
    pub fn locate(&self, p: [f64; 2]) -> usize {
        let mut t = if self.tris[self.hint].alive {
            self.hint
        } else {
            self.tris.iter().position(|t| t.alive).expect("non-empty")
        };
        let mut steps = 0usize;
        let mut rot = 0usize;
        'walk: loop {
            steps += 1;
            if steps > 4 * self.tris.len() + 16 {
                break;
            }
            let tv = self.tris[t].v;
            rot = (rot + 1) % 3;
            for k in 0..3 {
                let i = (k + rot) % 3;
                let a = self.pts[tv[(i + 1) % 3]];
                let b = self.pts[tv[(i + 2) % 3]];
                if orient(a, b, p) < 0.0 {
                    let nb = self.tris[t].n[i];
                    if nb == NONE {
                        break 'walk;
                    }
                    t = nb;
                    continue 'walk;
                }
            }
            return t;
        }
        // fallback: exhaustive search
        for (i, tri) in self.tris.iter().enumerate() {
            if !tri.alive {
                continue;
            }
            let q = self.tri_pts(i);
            if (0..3).all(|k| orient(q[(k + 1) % 3], q[(k + 2) % 3], p) >= 0.0) {
                return i;
            }
        }
        panic!("point outside the super-triangle");
    }

    /// Bowyer–Watson cavity of `p`; `None` if `p` coincides with a vertex.
    pub fn cavity(&mut self, p: [f64; 2]) -> Option<Cavity> {
        let t0 = self.locate(p);
        if self.tris[t0].v.iter().any(|&v| self.pts[v] == p) {
            return None;
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        if self.mark.len() < self.tris.len() {
            self.mark.resize(self.tris.len(), 0);
        }
        let stamp = self.stamp;
        let mut tris = vec![t0];
        self.mark[t0] = stamp;
        let mut k = 0;
        while k < tris.len() {
            let t = tris[k];
            k += 1;
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if nb == NONE || self.mark[nb] == stamp {
                    continue;
                }
                let q = self.tri_pts(nb);
                if incircle(c(q[0]), c(q[1]), c(q[2]), c(p)) > 0.0 {
                    self.mark[nb] = stamp;
                    tris.push(nb);
                }
            }
        }
        let mut boundary = Vec::new();
        for &t in &tris {
            let tri = self.tris[t];
            for i in 0..3 {
                let nb = tri.n[i];
                if nb == NONE || self.mark[nb] != stamp {
                    boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb));
                }
            }
        }
        Some(Cavity { tris, boundary })
    }

    /// Insert `p` into a previously computed cavity and return the new vertex.
    pub fn insert_into(&mut self, p: [f64; 2], cav: Cavity) -> usize {
        let pi = self.pts.len();
        self.pts.push(p);
        self.vert_tri.push(NONE);
        for &t in &cav.tris {
            self.tris[t].alive = false;
            self.free.push(t);
        }
        // free list is consumed in a fixed order for determinism
        self.free.sort_unstable_by(|a, b| b.cmp(a));
        let mut new: Vec<usize> = Vec::with_capacity(cav.boundary.len());
        for &(a, b, out) in &cav.boundary {
            let tri = Tri {
                v: [pi, a, b],
                n: [out, NONE, NONE],
                alive: true,
            };
            let id = if let Some(id) = self.free.pop() {
                self.tris[id] = tri;
                id
            } else {
                self.tris.push(tri);
                self.tris.len() - 1
            };
            if out != NONE {
                let o = &mut self.tris[out];
                for j in 0..3 {
                    let (x, y) = (o.v[(j + 1) % 3], o.v[(j + 2) % 3]);
                    if x == b && y == a {
                        o.n[j] = id;
                    }
                }
            }
            self.vert_tri[a] = id;
            self.vert_tri[b] = id;
            new.push(id);
        }
        self.vert_tri[pi] = new[0];
        // link the fan: tri [p, a, b] meets [p, b, ·] across (b, p) and [p, ·, a] across (p, a)
        for (k, &(a, b, _)) in cav.boundary.iter().enumerate() {
            let id = new[k];
            for (m, &(a2, b2, _)) in cav.boundary.iter().enumerate() {
                if a2 == b {
                    self.tris[id].n[1] = new[m];
                }
                if b2 == a {
                    self.tris[id].n[2] = new[m];
                }
            }
        }
        self.hint = new[0];
        if self.mark.len() < self.tris.len() {
            self.mark.resize(self.tris.len(), 0);
        }
        pi
    }

    pub fn insert(&mut self, p: [f64; 2]) -> Option<usize> {
        let cav = self.cavity(p)?;
        Some(self.insert_into(p, cav))
    }

    /// Live triangles incident to vertex `v`.
    pub fn star(&self, v: usize) -> Vec<usize> {
        let t0 = self.vert_tri[v];
        let mut out = vec![t0];
        let mut k = 0;
        while k < out.len() {
            let t = out[k];
            k += 1;
            let tri = self.tris[t];
            let iv = tri.v.iter().position(|&x| x == v).expect("incident");
            for i in [(iv + 1) % 3, (iv + 2) % 3] {
                let nb = tri.n[i];
                if nb != NONE && !out.contains(&nb) {
                    out.push(nb);
                }
            }
        }
        out
    }

    /// Triangles having `(a, b)` as an edge, with the apex vertex.
    pub fn edge_tris(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for t in self.star(a) {
            let v = self.tris[t].v;
            if v.contains(&b) {
                let apex = *v.iter().find(|&&x| x != a && x != b).expect("apex");
                out.push((t, apex));
            }
        }
        out
    }

    pub fn live(&self) -> impl Iterator<Item = (usize, &Tri)> {
        self.tris.iter().enumerate().filter(|(_, t)| t.alive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_delaunay(d: &Delaunay) {
        for (_, t) in d.live() {
            let q = [d.pts[t.v[0]], d.pts[t.v[1]], d.pts[t.v[2]]];
            assert!(orient(q[0], q[1], q[2]) > 0.0);
            for i in 0..3 {
                let nb = t.n[i];
                if nb == NONE {
                    continue;
                }
                let o = d.tris[nb];
                assert!(o.alive);
                let apex = *o.v.iter().find(|v| !t.v.contains(v)).unwrap();
                assert!(incircle(c(q[0]), c(q[1]), c(q[2]), c(d.pts[apex])) <= 0.0);
            }
        }
    }

    #[test]
    fn grid_with_cocircular_points() {
        let mut d = Delaunay::new([0.0, 0.0], [1.0, 1.0]);
        for i in 0..=10 {
            for j in 0..=10 {
                d.insert([i as f64 / 10.0, j as f64 / 10.0]);
            }
        }
        check_delaunay(&d);
        // 121 points plus 3 super vertices: 2n + 1 triangles for n interior-of-super points
        assert_eq!(d.live().count(), 2 * 121 + 1);
        assert!(d.insert([0.5, 0.5]).is_none());
    }

    #[test]
    fn scattered_points() {
        let mut d = Delaunay::new([-1.0, -1.0], [1.0, 1.0]);
        let mut x = 0.123456789f64;
        for _ in 0..500 {
            x = (x * 3.9 * (1.0 - x)).fract();
            let y = (x * 7.3).fract();
            d.insert([2.0 * x - 1.0, 2.0 * y - 1.0]);
        }
        check_delaunay(&d);
        let e = d.edge_tris(3, d.tris[d.star(3)[0]].v.iter().copied().find(|&v| v != 3).unwrap());
        assert!(!e.is_empty());
    }
}
