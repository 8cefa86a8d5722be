//! Constant-curvature models, chart conversions and geodesic triangles.
//!
//! Three charts are supported: the Klein chart (geodesics are straight
//! lines), the Poincaré disk (conformal, used for assembly) and the upper
//! half-plane (curvature −1 only).

mod ambient;
pub(crate) mod model;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub(crate) use model::{Mobius, Model, C64};

pub use ambient::{from_ambient, to_ambient, triangle_from_angles};

/// Angle tolerance used for right-angle classification.
pub const ANGLE_TOL: f64 = 1e-9;

/// Gaussian curvature restricted to the range where the Poincaré chart exists.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Curvature(f64);

impl Curvature {
    pub const MAX_ABS: f64 = 4.0 / 3.0;

    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa.abs() >= Self::MAX_ABS {
            return Err(Error::Domain(format!(
                "curvature {kappa} outside (-4/3, 4/3)"
            )));
        }
        Ok(Curvature(kappa))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Scaling `ℓ(κ) = κ / (4 − 3|κ|)` of the Poincaré chart.
    pub fn ell(self) -> f64 {
        self.0 / (4.0 - 3.0 * self.0.abs())
    }

    pub fn is_flat(self) -> bool {
        self.0 == 0.0
    }
}

impl TryFrom<f64> for Curvature {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Curvature::new(v)
    }
}

impl From<Curvature> for f64 {
    fn from(k: Curvature) -> f64 {
        k.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Klein,
    #[serde(rename = "poincare")]
    PoincareDisk,
    #[serde(rename = "halfplane")]
    HalfPlane,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub x: f64,
    pub y: f64,
}

impl ChartPoint {
    pub fn new(chart: Chart, x: f64, y: f64) -> Self {
        ChartPoint { chart, x, y }
    }
    pub fn klein(x: f64, y: f64) -> Self {
        Self::new(Chart::Klein, x, y)
    }
    pub fn poincare(x: f64, y: f64) -> Self {
        Self::new(Chart::PoincareDisk, x, y)
    }
    pub fn halfplane(x: f64, y: f64) -> Self {
        Self::new(Chart::HalfPlane, x, y)
    }
    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Symmetric 2×2 metric tensor in chart components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl MetricTensor {
    pub fn identity() -> Self {
        MetricTensor {
            g11: 1.0,
            g12: 0.0,
            g22: 1.0,
        }
    }

    pub fn scalar(s: f64) -> Self {
        MetricTensor {
            g11: s,
            g12: 0.0,
            g22: s,
        }
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g11 > 0.0 && self.det() > 0.0
    }

    pub fn inner(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        self.g11 * u[0] * v[0] + self.g12 * (u[0] * v[1] + u[1] * v[0]) + self.g22 * u[1] * v[1]
    }

    pub fn norm(&self, u: [f64; 2]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// Metric angle in `[0, π]` between two nonzero tangent vectors.
    pub fn angle(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        let c = self.inner(u, v) / (self.norm(u) * self.norm(v));
        // acos loses accuracy near 0 and π; use atan2 of the metric cross term
        let s = (self.det().sqrt() * (u[0] * v[1] - u[1] * v[0])).abs()
            / (self.norm(u) * self.norm(v));
        s.atan2(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bc {
    #[serde(rename = "N")]
    Neumann,
    #[serde(rename = "D")]
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriangleClass {
    Acute,
    Right,
    Obtuse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTriangle {
    pub kappa: Curvature,
    pub vertices: [ChartPoint; 3],
    /// `edge_bc[i]` tags the edge opposite vertex `i`.
    pub edge_bc: [Bc; 3],
    pub angles: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglesAndSides {
    pub angles: [f64; 3],
    /// `sides[i]` is the length of the edge opposite vertex `i`.
    pub sides: [f64; 3],
}

impl GeodesicTriangle {
    pub fn new(kappa: Curvature, vertices: [ChartPoint; 3], edge_bc: [Bc; 3]) -> Result<Self> {
        let chart = vertices[0].chart;
        if vertices.iter().any(|v| v.chart != chart) {
            return Err(Error::DegenerateTriangle(
                "vertices given in different charts".into(),
            ));
        }
        let kl = klein_vertices(kappa, &vertices)?;
        let cross = (kl[1][0] - kl[0][0]) * (kl[2][1] - kl[0][1])
            - (kl[1][1] - kl[0][1]) * (kl[2][0] - kl[0][0]);
        if cross == 0.0 {
            return Err(Error::DegenerateTriangle("collinear vertices".into()));
        }
        let angles = klein_angles(kappa, &kl);
        if let Some(a) = angles.iter().find(|&&a| a < 1e-9) {
            return Err(Error::DegenerateTriangle(format!("angle {a:e} too small")));
        }
        Ok(GeodesicTriangle {
            kappa,
            vertices,
            edge_bc,
            angles,
        })
    }

    pub fn with_bc(&self, edge_bc: [Bc; 3]) -> Self {
        GeodesicTriangle {
            edge_bc,
            ..self.clone()
        }
    }

    pub fn chart(&self) -> Chart {
        self.vertices[0].chart
    }

    /// Vertices in the Klein chart.
    pub fn klein(&self) -> [[f64; 2]; 3] {
        klein_vertices(self.kappa, &self.vertices).expect("validated at construction")
    }

    /// Counterclockwise orientation in the Klein chart.
    pub fn is_ccw(&self) -> bool {
        let k = self.klein();
        (k[1][0] - k[0][0]) * (k[2][1] - k[0][1]) - (k[1][1] - k[0][1]) * (k[2][0] - k[0][0]) > 0.0
    }

    /// Vertices `(a, b)` spanning edge `i` (the edge opposite vertex `i`).
    pub fn edge_vertices(i: usize) -> (usize, usize) {
        ((i + 1) % 3, (i + 2) % 3)
    }

    pub fn dirichlet_count(&self) -> usize {
        self.edge_bc.iter().filter(|b| **b == Bc::Dirichlet).count()
    }

    /// Boundary condition kind seen from vertex `v`.
    pub fn vertex_kind(&self, v: usize) -> VertexKind {
        let e1 = self.edge_bc[(v + 1) % 3];
        let e2 = self.edge_bc[(v + 2) % 3];
        match (e1, e2) {
            (Bc::Neumann, Bc::Neumann) => VertexKind::Neumann,
            (Bc::Dirichlet, Bc::Dirichlet) => VertexKind::Dirichlet,
            _ => VertexKind::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    Neumann,
    Mixed,
    Dirichlet,
}

fn klein_vertices(kappa: Curvature, v: &[ChartPoint; 3]) -> Result<[[f64; 2]; 3]> {
    let mut out = [[0.0; 2]; 3];
    for (o, p) in out.iter_mut().zip(v) {
        let q = chart_convert(*p, Chart::Klein, kappa)?;
        *o = [q.x, q.y];
    }
    Ok(out)
}

fn klein_angles(kappa: Curvature, k: &[[f64; 2]; 3]) -> [f64; 3] {
    let mut a = [0.0; 3];
    for i in 0..3 {
        let p = k[i];
        let q = k[(i + 1) % 3];
        let r = k[(i + 2) % 3];
        let g = klein_metric_raw(kappa.value(), p[0], p[1]);
        a[i] = g.angle([q[0] - p[0], q[1] - p[1]], [r[0] - p[0], r[1] - p[1]]);
    }
    a
}

pub fn check_point(kappa: Curvature, p: &ChartPoint) -> Result<()> {
    let k = kappa.value();
    if !p.x.is_finite() || !p.y.is_finite() {
        return Err(Error::Domain("non-finite coordinate".into()));
    }
    let r2 = p.x * p.x + p.y * p.y;
    let ok = match p.chart {
        Chart::Klein => k >= 0.0 || 1.0 + k * r2 > 0.0,
        Chart::PoincareDisk => {
            let l = kappa.ell();
            l == 0.0 || l.abs() * r2 < 1.0
        }
        Chart::HalfPlane => {
            if k != -1.0 {
                return Err(Error::UnsupportedConversion(format!(
                    "half-plane chart needs curvature -1, got {k}"
                )));
            }
            p.y > 0.0
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "({}, {}) outside the {:?} chart at curvature {k}",
            p.x, p.y, p.chart
        )))
    }
}

/// Poincaré conformal factor `ρ` with `g = ρ · (dx² + dy²)`.
pub fn conformal_factor(kappa: Curvature, p: &ChartPoint) -> Result<f64> {
    if p.chart != Chart::PoincareDisk {
        return Err(Error::Domain("conformal factor needs a Poincaré point".into()));
    }
    check_point(kappa, p)?;
    Ok(rho(kappa.ell(), p.x * p.x + p.y * p.y))
}

#[inline]
pub(crate) fn rho(ell: f64, r2: f64) -> f64 {
    let d = 1.0 + ell * r2;
    (3.0 * ell.abs() + 1.0) / (d * d)
}

/// Klein metric in Cartesian components.
pub fn klein_metric(kappa: Curvature, p: &ChartPoint) -> Result<MetricTensor> {
    if p.chart != Chart::Klein {
        return Err(Error::Domain("Klein metric needs a Klein point".into()));
    }
    check_point(kappa, p)?;
    Ok(klein_metric_raw(kappa.value(), p.x, p.y))
}

pub(crate) fn klein_metric_raw(k: f64, x: f64, y: f64) -> MetricTensor {
    let r2 = x * x + y * y;
    let d = 1.0 + k * r2;
    let c = 1.0 / d;
    let a = c * c;
    if r2 == 0.0 {
        return MetricTensor::identity();
    }
    MetricTensor {
        g11: (a * x * x + c * y * y) / r2,
        g12: (a - c) * x * y / r2,
        g22: (a * y * y + c * x * x) / r2,
    }
}

/// Metric tensor of any chart.
pub fn metric(kappa: Curvature, p: &ChartPoint) -> Result<MetricTensor> {
    match p.chart {
        Chart::Klein => klein_metric(kappa, p),
        Chart::PoincareDisk => conformal_factor(kappa, p).map(MetricTensor::scalar),
        Chart::HalfPlane => {
            check_point(kappa, p)?;
            Ok(MetricTensor::scalar(1.0 / (p.y * p.y)))
        }
    }
}

/// Normalized Poincaré coordinate of a point in any chart.
pub(crate) fn to_zeta(kappa: Curvature, p: &ChartPoint) -> Result<C64> {
    check_point(kappa, p)?;
    let m = Model::new(kappa);
    Ok(match p.chart {
        Chart::PoincareDisk => m.to_norm(p.x, p.y),
        Chart::Klein => {
            if m.eps == 0.0 {
                return Ok(C64::new(p.x, p.y));
            }
            let sk = kappa.value().abs().sqrt();
            let (x, y) = (p.x * sk, p.y * sk);
            let s = 1.0 / (1.0 + (1.0 + m.eps * (x * x + y * y)).sqrt());
            C64::new(x * s, y * s)
        }
        Chart::HalfPlane => {
            let w = C64::new(p.x, p.y);
            (w - Complex64::i()) / (w + Complex64::i())
        }
    })
}

pub(crate) fn from_zeta(kappa: Curvature, z: C64, chart: Chart) -> Result<ChartPoint> {
    let m = Model::new(kappa);
    let p = match chart {
        Chart::PoincareDisk => {
            let (x, y) = m.from_norm(z);
            ChartPoint::poincare(x, y)
        }
        Chart::Klein => {
            if m.eps == 0.0 {
                ChartPoint::klein(z.re, z.im)
            } else {
                let d = 1.0 - m.eps * z.norm_sqr();
                if d <= 0.0 {
                    return Err(Error::Domain(
                        "point outside the hemisphere has no Klein image".into(),
                    ));
                }
                let s = 2.0 / d / kappa.value().abs().sqrt();
                ChartPoint::klein(z.re * s, z.im * s)
            }
        }
        Chart::HalfPlane => {
            if kappa.value() != -1.0 {
                return Err(Error::UnsupportedConversion(format!(
                    "half-plane chart needs curvature -1, got {}",
                    kappa.value()
                )));
            }
            let w = Complex64::i() * (1.0 + z) / (1.0 - z);
            ChartPoint::halfplane(w.re, w.im)
        }
    };
    check_point(kappa, &p)?;
    Ok(p)
}

/// Image of `p` in the `target` chart.
pub fn chart_convert(p: ChartPoint, target: Chart, kappa: Curvature) -> Result<ChartPoint> {
    if (p.chart == Chart::HalfPlane || target == Chart::HalfPlane) && kappa.value() != -1.0 {
        return Err(Error::UnsupportedConversion(format!(
            "half-plane chart needs curvature -1, got {}",
            kappa.value()
        )));
    }
    if p.chart == target {
        check_point(kappa, &p)?;
        return Ok(p);
    }
    let z = to_zeta(kappa, &p)?;
    from_zeta(kappa, z, target)
}

pub fn geodesic_distance(kappa: Curvature, p: &ChartPoint, q: &ChartPoint) -> Result<f64> {
    if p.chart != q.chart {
        return Err(Error::Domain("points in different charts".into()));
    }
    check_point(kappa, p)?;
    check_point(kappa, q)?;
    let k = kappa.value();
    match p.chart {
        Chart::HalfPlane => {
            let dx = p.x - q.x;
            let dy = p.y - q.y;
            Ok(2.0 * ((dx * dx + dy * dy).sqrt() / (2.0 * (p.y * q.y).sqrt())).asinh())
        }
        Chart::Klein if k != 0.0 => {
            // ambient inner product of the lifted points
            let sk = k.abs().sqrt();
            let (a, b) = ([p.x * sk, p.y * sk], [q.x * sk, q.y * sk]);
            let e = k.signum();
            let na = 1.0 + e * (a[0] * a[0] + a[1] * a[1]);
            let nb = 1.0 + e * (b[0] * b[0] + b[1] * b[1]);
            let dot = 1.0 + e * (a[0] * b[0] + a[1] * b[1]);
            if k < 0.0 {
                // cosh(d) = dot/sqrt(na nb); use the sinh form for accuracy
                let cross2 = {
                    let dx = a[0] - b[0];
                    let dy = a[1] - b[1];
                    let c = a[0] * b[1] - a[1] * b[0];
                    dx * dx + dy * dy - c * c
                };
                let s = (cross2.max(0.0) / (na * nb)).sqrt();
                Ok(s.asinh() / sk)
            } else {
                let dx = a[0] - b[0];
                let dy = a[1] - b[1];
                let c = a[0] * b[1] - a[1] * b[0];
                let sin2 = dx * dx + dy * dy + c * c;
                Ok(sin2.sqrt().atan2(dot) / sk)
            }
        }
        _ => {
            let m = Model::new(kappa);
            let z = to_zeta(kappa, p)?;
            let w = to_zeta(kappa, q)?;
            Ok(m.distance(z, w))
        }
    }
}

pub fn triangle_angles_and_sides(t: &GeodesicTriangle) -> Result<AnglesAndSides> {
    let mut sides = [0.0; 3];
    for (i, s) in sides.iter_mut().enumerate() {
        let (a, b) = GeodesicTriangle::edge_vertices(i);
        *s = geodesic_distance(t.kappa, &t.vertices[a], &t.vertices[b])?;
    }
    if let Some(a) = t.angles.iter().find(|&&a| a < 1e-9) {
        return Err(Error::DegenerateTriangle(format!("angle {a:e} too small")));
    }
    Ok(AnglesAndSides {
        angles: t.angles,
        sides,
    })
}

pub fn triangle_area(t: &GeodesicTriangle) -> Result<f64> {
    let k = t.kappa.value();
    let sum: f64 = t.angles.iter().sum();
    let area = if k < 0.0 {
        (PI - sum) / -k
    } else if k > 0.0 {
        (sum - PI) / k
    } else {
        let v = t.klein();
        0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
            - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]))
            .abs()
    };
    if area <= 0.0 {
        return Err(Error::DegenerateTriangle(format!("non-positive area {area:e}")));
    }
    Ok(area)
}

pub fn reflect_across_geodesic(
    kappa: Curvature,
    geodesic: [ChartPoint; 2],
    p: &ChartPoint,
) -> Result<ChartPoint> {
    let a = to_zeta(kappa, &geodesic[0])?;
    let b = to_zeta(kappa, &geodesic[1])?;
    if (a - b).norm() == 0.0 {
        return Err(Error::DegenerateGeodesic);
    }
    let m = Model::new(kappa);
    let z = to_zeta(kappa, p)?;
    let r = m.reflect(a, b, z);
    from_zeta(kappa, r, p.chart)
}

pub fn classify_triangle(t: &GeodesicTriangle) -> TriangleClass {
    let max = t.angles.iter().cloned().fold(0.0, f64::max);
    if (max - PI / 2.0).abs() <= ANGLE_TOL {
        TriangleClass::Right
    } else if max > PI / 2.0 + ANGLE_TOL {
        TriangleClass::Obtuse
    } else {
        TriangleClass::Acute
    }
}

/// Signed distance from `p` to the geodesic through the two points, positive
/// on the left of the direction from the first point to the second.
pub fn distance_to_geodesic(
    kappa: Curvature,
    geodesic: [ChartPoint; 2],
    p: &ChartPoint,
) -> Result<f64> {
    let a = to_zeta(kappa, &geodesic[0])?;
    let b = to_zeta(kappa, &geodesic[1])?;
    if (a - b).norm() == 0.0 {
        return Err(Error::DegenerateGeodesic);
    }
    let m = Model::new(kappa);
    let fr = m.frame(a, Some(b));
    Ok(m.signed_distance_to_axis(&fr, to_zeta(kappa, p)?))
}

/// Point at arclength `s` from the first point along the geodesic, then
/// signed distance `d` along the perpendicular; `d` fixed traces an
/// equidistant curve.
pub fn equidistant_point(
    kappa: Curvature,
    geodesic: [ChartPoint; 2],
    s: f64,
    d: f64,
    chart: Chart,
) -> Result<ChartPoint> {
    let a = to_zeta(kappa, &geodesic[0])?;
    let b = to_zeta(kappa, &geodesic[1])?;
    if (a - b).norm() == 0.0 {
        return Err(Error::DegenerateGeodesic);
    }
    let m = Model::new(kappa);
    let fr = m.frame(a, Some(b));
    from_zeta(kappa, fr.invert(m.frame_point(s, d)), chart)
}

/// Triangle specification as read from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangleSpec {
    pub curvature: f64,
    pub chart: Chart,
    pub vertices: [[f64; 2]; 3],
    #[serde(default = "all_neumann")]
    pub bc: [Bc; 3],
}

fn all_neumann() -> [Bc; 3] {
    [Bc::Neumann; 3]
}

impl TriangleSpec {
    pub fn build(&self) -> Result<GeodesicTriangle> {
        let kappa = Curvature::new(self.curvature)?;
        let v = self
            .vertices
            .map(|[x, y]| ChartPoint::new(self.chart, x, y));
        GeodesicTriangle::new(kappa, v, self.bc)
    }
}

impl From<&GeodesicTriangle> for TriangleSpec {
    fn from(t: &GeodesicTriangle) -> Self {
        TriangleSpec {
            curvature: t.kappa.value(),
            chart: t.chart(),
            vertices: t.vertices.map(|p| [p.x, p.y]),
            bc: t.edge_bc,
        }
    }
}
