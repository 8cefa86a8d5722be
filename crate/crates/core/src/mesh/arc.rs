//! Arclength parametrization of a geodesic edge in the Poincaré chart.

use crate::geometry::{rho, Curvature, Mobius, Model, C64};

#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeArc {
    model: Model,
    frame: Mobius,
    ell: f64,
    /// metric length of the edge
    pub len: f64,
}

impl EdgeArc {
    /// Edge from `a` to `b`, both in Poincaré chart coordinates.
    pub fn new(kappa: Curvature, a: [f64; 2], b: [f64; 2]) -> Self {
        let model = Model::new(kappa);
        let za = model.to_norm(a[0], a[1]);
        let zb = model.to_norm(b[0], b[1]);
        let frame = model.frame(za, Some(zb));
        EdgeArc {
            model,
            frame,
            ell: kappa.ell(),
            len: model.distance(za, zb),
        }
    }

    /// Point at metric arclength `s` from the start.
    pub fn point(&self, s: f64) -> [f64; 2] {
        let w = self.model.frame_point(s, 0.0);
        let (x, y) = self.model.from_norm(self.frame.invert(w));
        [x, y]
    }

    /// Arclength coordinate of the projection of `p` onto the geodesic.
    pub fn param(&self, p: [f64; 2]) -> f64 {
        let w = self.frame.apply(self.model.to_norm(p[0], p[1]));
        let x = C64::new(w.re, 0.0);
        self.model.distance(C64::new(0.0, 0.0), x) * w.re.signum()
    }

    /// Chart speed `|dp/ds|` at arclength `s`.
    pub fn chart_speed(&self, s: f64) -> f64 {
        let p = self.point(s);
        1.0 / rho(self.ell, p[0] * p[0] + p[1] * p[1]).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance_to_geodesic, ChartPoint};

    #[test]
    fn points_on_geodesic() {
        for kv in [-1.0, -0.3, 0.0, 0.9] {
            let k = Curvature::new(kv).unwrap();
            let (a, b) = ([-0.2, 0.1], [0.3, 0.25]);
            let arc = EdgeArc::new(k, a, b);
            let g = [ChartPoint::poincare(a[0], a[1]), ChartPoint::poincare(b[0], b[1])];
            for t in [0.0, 0.2, 0.5, 1.0] {
                let p = arc.point(t * arc.len);
                let d = distance_to_geodesic(k, g, &ChartPoint::poincare(p[0], p[1])).unwrap();
                assert!(d.abs() < 1e-14);
                assert!((arc.param(p) - t * arc.len).abs() < 1e-13);
            }
            let end = arc.point(arc.len);
            assert!((end[0] - b[0]).abs() < 1e-14 && (end[1] - b[1]).abs() < 1e-14);
        }
    }
}
