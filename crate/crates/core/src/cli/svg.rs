//! Static plot of an eigenfunction in the Poincaré chart: boundary coloured
//! by boundary condition, contour lines, the nodal line and critical points.

use crate::analysis::{extract_nodal_set_with, CriticalReport, NodalSet};
use crate::geometry::Bc;
use crate::mesh::TriangleMesh;
use std::fmt::Write;

const SIZE: f64 = 480.0;
const PAD: f64 = 16.0;
const CONTOURS: usize = 10;

struct Frame {
    lo: [f64; 2],
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(pts: &[[f64; 2]]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in pts {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let scale = (SIZE - 2.0 * PAD) / span;
        Frame {
            lo,
            scale,
            height: (hi[1] - lo[1]) * scale + 2.0 * PAD,
        }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (
            PAD + (p[0] - self.lo[0]) * self.scale,
            self.height - PAD - (p[1] - self.lo[1]) * self.scale,
        )
    }

    fn points(&self, line: &[[f64; 2]]) -> String {
        let mut s = String::new();
        for (i, p) in line.iter().enumerate() {
            let (x, y) = self.map(*p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    }
}

/// SVG of `u` on `m`. The nodal line is drawn as `<path>` elements, one per
/// chain; everything else uses other elements.
pub fn render(m: &TriangleMesh, u: &[f64], nodal: &NodalSet, critical: Option<&CriticalReport>) -> String {
    let arcs = m.edge_arcs();
    let boundary: Vec<Vec<[f64; 2]>> = arcs
        .iter()
        .map(|a| (0..=64).map(|i| a.point(a.len * i as f64 / 64.0)).collect())
        .collect();
    let all: Vec<[f64; 2]> = boundary.iter().flatten().copied().collect();
    let f = Frame::new(&all);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE:.0}" height="{:.0}" viewBox="0 0 {SIZE:.0} {:.0}">"#,
        f.height, f.height
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi > lo {
        s.push_str("<g stroke=\"#bbbbbb\" stroke-width=\"0.8\" fill=\"none\">\n");
        for j in 0..CONTOURS {
            let c = lo + (hi - lo) * (j as f64 + 0.5) / CONTOURS as f64;
            let shifted: Vec<f64> = u.iter().map(|v| v - c).collect();
            for line in extract_nodal_set_with(&shifted, m).polylines {
                let _ = writeln!(s, "<polyline points=\"{}\"/>", f.points(&line));
            }
        }
        s.push_str("</g>\n");
    }
    for (e, line) in boundary.iter().enumerate() {
        let color = match m.triangle.edge_bc[e] {
            Bc::Neumann => "#1f5fbf",
            Bc::Dirichlet => "#c83232",
        };
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" stroke=\"{color}\" stroke-width=\"2.5\" fill=\"none\"/>",
            f.points(line)
        );
    }
    for line in &nodal.polylines {
        let mut d = String::new();
        for (i, p) in line.iter().enumerate() {
            let (x, y) = f.map(*p);
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
        }
        let _ = writeln!(s, "<path d=\"{d}\" stroke=\"black\" stroke-width=\"1.8\" fill=\"none\"/>");
    }
    if let Some(r) = critical {
        let pts = r.interior_points.iter().map(|p| p.location).chain(r.edge_points.iter().map(|p| p.location));
        for p in pts {
            let (x, y) = f.map(p);
            let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"#e08000\"/>");
        }
    }
    s.push_str("</svg>\n");
    s
}
