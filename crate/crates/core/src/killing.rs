//! Loxodromic and elliptic Killing fields.
//!
//! A field is stored as the isometry moving its axis (or center) to a
//! canonical position plus a scale. In normalized coordinates the canonical
//! loxodromic field along the real axis is `(1 + ε w²)/λ₀` with unit speed at
//! the origin, and the canonical elliptic field is `i w`. At κ = 0 the same
//! formulas give the unit translation and the rotation about the center.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    check_point, distance_to_geodesic, from_zeta, metric, reflect_across_geodesic, to_zeta,
    Chart, ChartPoint, Curvature, Mobius, Model, C64,
};

/// Anything that yields a tangent vector in the chart of the query point.
pub trait VectorField {
    fn kappa(&self) -> Curvature;
    fn eval(&self, p: &ChartPoint) -> Result<[f64; 2]>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KillingKind {
    Loxodromic { axis: [ChartPoint; 2] },
    /// Flat limit of a loxodromic field.
    Translation { axis: [ChartPoint; 2] },
    Elliptic { center: ChartPoint },
}

#[derive(Debug, Clone, Copy)]
pub struct KillingField {
    pub kind: KillingKind,
    pub orientation: i8,
    pub kappa: Curvature,
    scale: f64,
    frame: Mobius,
    model: Model,
}

impl KillingField {
    /// Loxodromic field along the geodesic through `axis`; orientation +1
    /// flows from `axis[0]` toward `axis[1]`.
    pub fn loxodromic(kappa: Curvature, axis: [ChartPoint; 2], orientation: i8) -> Result<Self> {
        if kappa.is_flat() {
            return Err(Error::UnsupportedKind(
                "loxodromic field at zero curvature; use a translation".into(),
            ));
        }
        Self::build(kappa, KillingKind::Loxodromic { axis }, orientation)
    }

    pub fn translation(kappa: Curvature, axis: [ChartPoint; 2], orientation: i8) -> Result<Self> {
        if !kappa.is_flat() {
            return Err(Error::UnsupportedKind(
                "translation requested at nonzero curvature".into(),
            ));
        }
        Self::build(kappa, KillingKind::Translation { axis }, orientation)
    }

    /// Loxodromic field, or its translation limit when κ = 0.
    pub fn along(kappa: Curvature, axis: [ChartPoint; 2], orientation: i8) -> Result<Self> {
        if kappa.is_flat() {
            Self::translation(kappa, axis, orientation)
        } else {
            Self::loxodromic(kappa, axis, orientation)
        }
    }

    /// Rotation field about `center`; orientation +1 is counterclockwise in
    /// the Poincaré chart.
    pub fn elliptic(kappa: Curvature, center: ChartPoint, orientation: i8) -> Result<Self> {
        Self::build(kappa, KillingKind::Elliptic { center }, orientation)
    }

    fn build(kappa: Curvature, kind: KillingKind, orientation: i8) -> Result<Self> {
        if orientation != 1 && orientation != -1 {
            return Err(Error::UnsupportedKind(format!("orientation {orientation}")));
        }
        let model = Model::new(kappa);
        let frame = match kind {
            KillingKind::Loxodromic { axis } | KillingKind::Translation { axis } => {
                let a = to_zeta(kappa, &axis[0])?;
                let b = to_zeta(kappa, &axis[1])?;
                if (a - b).norm() == 0.0 {
                    return Err(Error::DegenerateGeodesic);
                }
                model.frame(a, Some(b))
            }
            KillingKind::Elliptic { center } => model.frame(to_zeta(kappa, &center)?, None),
        };
        Ok(KillingField {
            kind,
            orientation,
            kappa,
            scale: 1.0,
            frame,
            model,
        })
    }

    pub fn is_loxodromic(&self) -> bool {
        !matches!(self.kind, KillingKind::Elliptic { .. })
    }

    pub fn negated(mut self) -> Self {
        self.orientation = -self.orientation;
        self
    }

    /// Rescale so that the field has unit metric length at `p`.
    pub fn normalized_at(mut self, p: &ChartPoint) -> Result<Self> {
        let z = to_zeta(self.kappa, p)?;
        let v = self.eval_zeta(z);
        let n = v.norm() * self.model.norm_factor(z);
        if n == 0.0 {
            return Err(Error::ZeroField);
        }
        self.scale /= n;
        Ok(self)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Field in normalized Poincaré coordinates.
    pub(crate) fn eval_zeta(&self, z: C64) -> C64 {
        let w = self.frame.apply(z);
        let v0 = match self.kind {
            KillingKind::Elliptic { .. } => Complex64::i() * w,
            _ => {
                let lambda0 = if self.model.eps == 0.0 {
                    1.0
                } else {
                    2.0 / self.model.kappa.abs().sqrt()
                };
                (1.0 + self.model.eps * w * w) / lambda0
            }
        };
        v0 / self.frame.derivative(z) * (self.scale * f64::from(self.orientation))
    }

    /// Field value at `p`, in `p`'s chart components.
    pub fn evaluate(&self, p: &ChartPoint) -> Result<[f64; 2]> {
        let z = to_zeta(self.kappa, p)?;
        let v = self.eval_zeta(z);
        Ok(push_forward(&self.model, self.kappa, z, v, p.chart))
    }

    /// Metric angle in `[0, π]` between the field and the geodesic at `p`,
    /// measured against the direction from `geodesic[0]` to `geodesic[1]`.
    pub fn angle_with_geodesic(&self, geodesic: [ChartPoint; 2], p: &ChartPoint) -> Result<f64> {
        let off = distance_to_geodesic(self.kappa, geodesic, p)?;
        if off.abs() > 1e-9 {
            return Err(Error::PointNotOnGeodesic(off));
        }
        let a = to_zeta(self.kappa, &geodesic[0])?;
        let b = to_zeta(self.kappa, &geodesic[1])?;
        let fr = self.model.frame(a, Some(b));
        let z = to_zeta(self.kappa, p)?;
        let v = self.eval_zeta(z);
        if v.norm() <= 1e-300 {
            return Err(Error::ZeroField);
        }
        // the frame sends the geodesic to the real axis; its tangent pulls back to 1/M'(z)
        Ok((v * fr.derivative(z)).arg().abs())
    }
}

impl VectorField for KillingField {
    fn kappa(&self) -> Curvature {
        self.kappa
    }
    fn eval(&self, p: &ChartPoint) -> Result<[f64; 2]> {
        self.evaluate(p)
    }
}

/// Convert a normalized-coordinate velocity `v` at `z` to chart components.
pub(crate) fn push_forward(m: &Model, kappa: Curvature, z: C64, v: C64, chart: Chart) -> [f64; 2] {
    match chart {
        Chart::PoincareDisk => [v.re / m.scale, v.im / m.scale],
        Chart::Klein => {
            if m.eps == 0.0 {
                return [v.re, v.im];
            }
            let sk = kappa.value().abs().sqrt();
            let d = 1.0 - m.eps * z.norm_sqr();
            let dot = z.re * v.re + z.im * v.im;
            let c = 2.0 / sk;
            [
                c * (v.re / d + 2.0 * m.eps * z.re * dot / (d * d)),
                c * (v.im / d + 2.0 * m.eps * z.im * dot / (d * d)),
            ]
        }
        Chart::HalfPlane => {
            let one = Complex64::new(1.0, 0.0);
            let dw = 2.0 * Complex64::i() / ((one - z) * (one - z));
            let u = dw * v;
            [u.re, u.im]
        }
    }
}

/// Geodesic through `p` perpendicular to `geodesic`, as two points ordered
/// from `p` toward the foot of the perpendicular.
pub fn perpendicular_axis(
    kappa: Curvature,
    geodesic: [ChartPoint; 2],
    p: &ChartPoint,
) -> Result<[ChartPoint; 2]> {
    let q = reflect_across_geodesic(kappa, geodesic, p)?;
    let d = crate::geometry::geodesic_distance(kappa, p, &q)?;
    if d < 1e-12 {
        return Err(Error::DegenerateGeodesic);
    }
    Ok([*p, q])
}

/// Foot of the perpendicular from `p` to `geodesic`.
pub fn perpendicular_foot(
    kappa: Curvature,
    geodesic: [ChartPoint; 2],
    p: &ChartPoint,
) -> Result<ChartPoint> {
    let m = Model::new(kappa);
    let a = to_zeta(kappa, &geodesic[0])?;
    let b = to_zeta(kappa, &geodesic[1])?;
    if (a - b).norm() == 0.0 {
        return Err(Error::DegenerateGeodesic);
    }
    let fr = m.frame(a, Some(b));
    let w = fr.apply(to_zeta(kappa, p)?);
    let mid_w = foot_on_real_axis(&m, w);
    from_zeta(kappa, fr.invert(mid_w), p.chart)
}

fn foot_on_real_axis(m: &Model, w: C64) -> C64 {
    if m.eps == 0.0 {
        return C64::new(w.re, 0.0);
    }
    // perpendicular through w: circle centered at c on the real axis with r² = c² + ε
    let c = (w.norm_sqr() - m.eps) / (2.0 * w.re);
    if w.re == 0.0 || !c.is_finite() {
        return C64::new(0.0, 0.0);
    }
    let r = (c * c + m.eps).max(0.0).sqrt();
    let x1 = c - r;
    let x2 = c + r;
    let x = if m.eps < 0.0 {
        // the root inside the disk
        if x1.abs() < x2.abs() { x1 } else { x2 }
    } else {
        // antipodal roots; take the one nearer to w on the sphere
        let chord = |x: f64| (C64::new(x, 0.0) - w).norm_sqr() / (m.eps + x * x);
        if chord(x1) <= chord(x2) { x1 } else { x2 }
    };
    C64::new(x, 0.0)
}

/// Finite-difference Lie derivative of the metric along `x`, Frobenius norm.
pub fn killing_residual<F: VectorField + ?Sized>(x: &F, p: &ChartPoint, h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::Domain(format!("step {h} outside (0, 1e-3]")));
    }
    let kappa = x.kappa();
    check_point(kappa, p)?;
    let at = |dx: f64, dy: f64| ChartPoint::new(p.chart, p.x + dx, p.y + dy);
    let g = |q: &ChartPoint| -> Result<[[f64; 2]; 2]> {
        let m = metric(kappa, q)?;
        Ok([[m.g11, m.g12], [m.g12, m.g22]])
    };
    let g0 = g(p)?;
    let (gxp, gxm, gyp, gym) = (g(&at(h, 0.0))?, g(&at(-h, 0.0))?, g(&at(0.0, h))?, g(&at(0.0, -h))?);
    let xv = x.eval(p)?;
    let (xxp, xxm, xyp, xym) = (
        x.eval(&at(h, 0.0))?,
        x.eval(&at(-h, 0.0))?,
        x.eval(&at(0.0, h))?,
        x.eval(&at(0.0, -h))?,
    );
    // dg[k][i][j] = ∂_k g_ij ; dx[i][k] = ∂_i X^k
    let mut dg = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            dg[0][i][j] = (gxp[i][j] - gxm[i][j]) / (2.0 * h);
            dg[1][i][j] = (gyp[i][j] - gym[i][j]) / (2.0 * h);
        }
    }
    let mut dxv = [[0.0; 2]; 2];
    for k in 0..2 {
        dxv[0][k] = (xxp[k] - xxm[k]) / (2.0 * h);
        dxv[1][k] = (xyp[k] - xym[k]) / (2.0 * h);
    }
    let mut sum = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut l = 0.0;
            for k in 0..2 {
                l += xv[k] * dg[k][i][j] + g0[k][j] * dxv[i][k] + g0[i][k] * dxv[j][k];
            }
            sum += l * l;
        }
    }
    Ok(sum.sqrt())
}

/// Serialized Killing field description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KillingSpec {
    pub kind: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    pub orientation: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecKind {
    Loxodromic,
    Elliptic,
}

impl KillingSpec {
    /// Build the field with coordinates read in `chart`. A loxodromic spec
    /// at zero curvature yields the translation limit.
    pub fn build(&self, kappa: Curvature, chart: Chart) -> Result<KillingField> {
        match self.kind {
            SpecKind::Loxodromic => {
                let a = self
                    .axis
                    .ok_or_else(|| Error::Config("loxodromic field needs an axis".into()))?;
                let axis = a.map(|[x, y]| ChartPoint::new(chart, x, y));
                KillingField::along(kappa, axis, self.orientation)
            }
            SpecKind::Elliptic => {
                let [x, y] = self
                    .center
                    .ok_or_else(|| Error::Config("elliptic field needs a center".into()))?;
                KillingField::elliptic(kappa, ChartPoint::new(chart, x, y), self.orientation)
            }
        }
    }

    /// Description of `field` in `chart` coordinates.
    pub fn describe(field: &KillingField, chart: Chart) -> Result<Self> {
        let conv = |p: ChartPoint| -> Result<[f64; 2]> {
            let q = crate::geometry::chart_convert(p, chart, field.kappa)?;
            Ok([q.x, q.y])
        };
        Ok(match field.kind {
            KillingKind::Loxodromic { axis } | KillingKind::Translation { axis } => KillingSpec {
                kind: SpecKind::Loxodromic,
                axis: Some([conv(axis[0])?, conv(axis[1])?]),
                center: None,
                orientation: field.orientation,
            },
            KillingKind::Elliptic { center } => KillingSpec {
                kind: SpecKind::Elliptic,
                axis: None,
                center: Some(conv(center)?),
                orientation: field.orientation,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chart_convert, geodesic_distance};
    use approx::assert_relative_eq;
    use std::f64::consts::{E, FRAC_PI_2};

    fn k(v: f64) -> Curvature {
        Curvature::new(v).unwrap()
    }

    #[test]
    fn canonical_elliptic() {
        for kv in [0.0, -0.5, 0.3] {
            let r = KillingField::elliptic(k(kv), ChartPoint::poincare(0.0, 0.0), 1).unwrap();
            assert_eq!(r.evaluate(&ChartPoint::poincare(0.0, 0.0)).unwrap(), [0.0, 0.0]);
            let v = r.evaluate(&ChartPoint::poincare(1.0, 0.0)).unwrap();
            assert_relative_eq!(v[0], 0.0, epsilon = 1e-15);
            assert_relative_eq!(v[1], 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn canonical_loxodromic_halfplane() {
        let axis = [ChartPoint::halfplane(0.0, 1.0), ChartPoint::halfplane(0.0, E)];
        let l = KillingField::loxodromic(k(-1.0), axis, 1).unwrap();
        for (x, y) in [(0.0, 1.0), (0.5, 1.0), (-0.3, 2.5)] {
            let v = l.evaluate(&ChartPoint::halfplane(x, y)).unwrap();
            assert_relative_eq!(v[0], x, epsilon = 1e-13);
            assert_relative_eq!(v[1], y, epsilon = 1e-13);
        }
    }

    #[test]
    fn loxodromic_at_zero_curvature() {
        let axis = [ChartPoint::klein(0.0, 0.0), ChartPoint::klein(1.0, 1.0)];
        assert!(matches!(
            KillingField::loxodromic(k(0.0), axis, 1),
            Err(Error::UnsupportedKind(_))
        ));
        let t = KillingField::along(k(0.0), axis, -1).unwrap();
        let v = t.evaluate(&ChartPoint::klein(3.0, -2.0)).unwrap();
        assert_relative_eq!(v[0], -std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(v[1], -std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn residual_small_for_killing_fields() {
        let r = KillingField::elliptic(k(-1.0), ChartPoint::poincare(0.0, 0.0), 1).unwrap();
        assert!(killing_residual(&r, &ChartPoint::poincare(0.3, 0.2), 1e-4).unwrap() < 1e-6);
        let axis = [ChartPoint::halfplane(0.0, 1.0), ChartPoint::halfplane(0.0, E)];
        let l = KillingField::loxodromic(k(-1.0), axis, 1).unwrap();
        assert!(killing_residual(&l, &ChartPoint::halfplane(0.5, 1.0), 1e-4).unwrap() < 1e-6);
        // off-center fields in the Klein chart
        let axis = [ChartPoint::klein(-0.3, 0.1), ChartPoint::klein(0.2, 0.5)];
        for kv in [-1.2, -0.4, 0.6, 1.1] {
            let l = KillingField::along(k(kv), axis, 1).unwrap();
            assert!(killing_residual(&l, &ChartPoint::klein(0.1, -0.2), 1e-4).unwrap() < 1e-6);
            let e = KillingField::elliptic(k(kv), ChartPoint::klein(0.2, 0.1), -1).unwrap();
            assert!(killing_residual(&e, &ChartPoint::klein(-0.15, 0.3), 1e-4).unwrap() < 1e-6);
        }
    }

    struct XSquared;
    impl VectorField for XSquared {
        fn kappa(&self) -> Curvature {
            Curvature::new(-1.0).unwrap()
        }
        fn eval(&self, p: &ChartPoint) -> Result<[f64; 2]> {
            Ok([p.x * p.x, 0.0])
        }
    }

    #[test]
    fn residual_detects_non_killing() {
        assert!(killing_residual(&XSquared, &ChartPoint::poincare(0.3, 0.2), 1e-4).unwrap() > 1e-2);
    }

    #[test]
    fn tangency_and_orthogonality() {
        let kap = k(-1.0);
        let axis = [ChartPoint::klein(-0.3, 0.1), ChartPoint::klein(0.2, 0.5)];
        let l = KillingField::loxodromic(kap, axis, 1).unwrap();
        for t in [0.0, 0.3, 0.7, 1.0] {
            let p = ChartPoint::klein(-0.3 + 0.5 * t, 0.1 + 0.4 * t);
            assert!(l.angle_with_geodesic(axis, &p).unwrap() < 1e-9);
        }
        let c = ChartPoint::klein(0.1, 0.2);
        let e = KillingField::elliptic(kap, c, 1).unwrap();
        let g = [c, ChartPoint::klein(0.5, -0.1)];
        for t in [0.25, 0.5, 1.0] {
            let p = ChartPoint::klein(0.1 + 0.4 * t, 0.2 - 0.3 * t);
            assert!((e.angle_with_geodesic(g, &p).unwrap() - FRAC_PI_2).abs() < 1e-9);
        }
        assert!(matches!(
            e.angle_with_geodesic(g, &ChartPoint::klein(0.0, 0.0)),
            Err(Error::PointNotOnGeodesic(_))
        ));
        assert!(matches!(e.angle_with_geodesic(g, &c), Err(Error::ZeroField)));
    }

    #[test]
    fn normalization_gives_unit_length() {
        let kap = k(-0.7);
        let axis = [ChartPoint::klein(-0.3, 0.1), ChartPoint::klein(0.2, 0.5)];
        let p = ChartPoint::klein(0.05, -0.2);
        let l = KillingField::loxodromic(kap, axis, 1).unwrap().normalized_at(&p).unwrap();
        let v = l.evaluate(&p).unwrap();
        let g = metric(kap, &p).unwrap();
        assert_relative_eq!(g.norm(v), 1.0, epsilon = 1e-12);
        // unit speed at the first axis point without normalization
        let l = KillingField::loxodromic(kap, axis, 1).unwrap();
        let v = l.evaluate(&axis[0]).unwrap();
        assert_relative_eq!(metric(kap, &axis[0]).unwrap().norm(v), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn perpendicular_helpers() {
        let kap = k(-1.0);
        let g = [ChartPoint::klein(-0.5, -0.2), ChartPoint::klein(0.6, 0.1)];
        let p = ChartPoint::klein(0.1, 0.5);
        let foot = perpendicular_foot(kap, g, &p).unwrap();
        assert!(distance_to_geodesic(kap, g, &foot).unwrap().abs() < 1e-12);
        let d = geodesic_distance(kap, &p, &foot).unwrap();
        assert_relative_eq!(d, distance_to_geodesic(kap, g, &p).unwrap().abs(), epsilon = 1e-12);
        let ax = perpendicular_axis(kap, g, &p).unwrap();
        let l = KillingField::loxodromic(kap, ax, 1).unwrap();
        assert!((l.angle_with_geodesic(g, &foot).unwrap() - FRAC_PI_2).abs() < 1e-9);
        let pk = chart_convert(foot, Chart::PoincareDisk, kap).unwrap();
        assert!(pk.x.is_finite());
    }

    #[test]
    fn spec_roundtrip() {
        let s: KillingSpec = serde_json::from_str(r#"{"kind":"elliptic","center":[0.1,0.2],"orientation":-1}"#).unwrap();
        let f = s.build(k(-1.0), Chart::Klein).unwrap();
        assert_eq!(KillingSpec::describe(&f, Chart::Klein).unwrap(), s);
        let bad = r#"{"kind":"loxodromic","orientation":1}"#;
        let s: KillingSpec = serde_json::from_str(bad).unwrap();
        assert!(s.build(k(-1.0), Chart::Klein).is_err());
    }
}
