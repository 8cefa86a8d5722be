//! Ambient (sphere / hyperboloid) coordinates and triangles from angles.

use std::f64::consts::PI;

use super::{Bc, ChartPoint, Chart, Curvature, GeodesicTriangle, chart_convert};
use crate::error::{Error, Result};

/// Lift to the unit sphere (κ > 0) or unit hyperboloid (κ < 0), curvature
/// scaled out. For κ = 0 the point is returned as `(x, y, 1)`.
pub fn to_ambient(kappa: Curvature, p: &ChartPoint) -> Result<[f64; 3]> {
    let q = chart_convert(*p, Chart::Klein, kappa)?;
    let k = kappa.value();
    if k == 0.0 {
        return Ok([q.x, q.y, 1.0]);
    }
    let sk = k.abs().sqrt();
    let (x, y) = (q.x * sk, q.y * sk);
    let n = (1.0 + k.signum() * (x * x + y * y)).sqrt();
    Ok([x / n, y / n, 1.0 / n])
}

/// Klein-chart point of an ambient vector (only its direction matters).
pub fn from_ambient(kappa: Curvature, x: [f64; 3]) -> Result<ChartPoint> {
    if x[2] <= 0.0 {
        return Err(Error::Domain("ambient point outside the upper sheet or hemisphere".into()));
    }
    let k = kappa.value();
    let s = if k == 0.0 { 1.0 } else { 1.0 / k.abs().sqrt() };
    let p = ChartPoint::klein(x[0] / x[2] * s, x[1] / x[2] * s);
    super::check_point(kappa, &p)?;
    Ok(p)
}

/// Geodesic triangle (Klein chart, counterclockwise) with the prescribed
/// vertex angles. Hyperbolic triangles put the largest angle at the chart
/// origin, spherical ones are centered on the pole, flat ones have vertex 0 at
/// the origin and unit edge from vertex 0 to vertex 1.
pub fn triangle_from_angles(kappa: Curvature, angles: [f64; 3], bc: [Bc; 3]) -> Result<GeodesicTriangle> {
    let k = kappa.value();
    let sum: f64 = angles.iter().sum();
    if angles.iter().any(|&a| !(a > 0.0 && a < PI)) {
        return Err(Error::DegenerateTriangle("angles must lie in (0, π)".into()));
    }
    let bad_sum = if k < 0.0 {
        sum >= PI
    } else if k > 0.0 {
        sum <= PI
    } else {
        (sum - PI).abs() > 1e-9
    };
    if bad_sum {
        return Err(Error::DegenerateTriangle(format!(
            "angle sum {sum} incompatible with curvature {k}"
        )));
    }
    let v = if k == 0.0 {
        let b = angles[1].sin() / angles[2].sin();
        [
            [0.0, 0.0],
            [1.0, 0.0],
            [b * angles[0].cos(), b * angles[0].sin()],
        ]
    } else {
        let sk = k.abs().sqrt();
        // unit-curvature side lengths
        let mut sides = [0.0; 3];
        for (i, s) in sides.iter_mut().enumerate() {
            let (a, b, c) = (angles[i], angles[(i + 1) % 3], angles[(i + 2) % 3]);
            let ch = (a.cos() + b.cos() * c.cos()) / (b.sin() * c.sin());
            *s = if k < 0.0 { ch.max(1.0).acosh() } else { ch.clamp(-1.0, 1.0).acos() };
        }
        let m = if k < 0.0 {
            (0..3).fold(0, |m, i| if angles[i] > angles[m] { i } else { m })
        } else {
            0
        };
        let (m1, m2) = ((m + 1) % 3, (m + 2) % 3);
        let mut amb = [[0.0; 3]; 3];
        let lift = |d: f64, phi: f64| -> [f64; 3] {
            if k < 0.0 {
                [d.sinh() * phi.cos(), d.sinh() * phi.sin(), d.cosh()]
            } else {
                [d.sin() * phi.cos(), d.sin() * phi.sin(), d.cos()]
            }
        };
        amb[m] = [0.0, 0.0, 1.0];
        amb[m1] = lift(sides[m2], 0.0);
        amb[m2] = lift(sides[m1], angles[m]);
        if k > 0.0 {
            let c = [0, 1, 2].map(|j| amb.iter().map(|a| a[j]).sum::<f64>());
            let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let c = c.map(|x| x / n);
            for a in amb.iter_mut() {
                *a = rotate_to_pole(c, *a);
            }
        }
        let mut v = [[0.0; 2]; 3];
        for i in 0..3 {
            if amb[i][2] <= 1e-12 {
                return Err(Error::Domain("triangle does not fit in the open hemisphere".into()));
            }
            v[i] = [amb[i][0] / amb[i][2] / sk, amb[i][1] / amb[i][2] / sk];
        }
        v
    };
    GeodesicTriangle::new(kappa, v.map(|[x, y]| ChartPoint::klein(x, y)), bc)
}

/// Rotation taking unit vector `c` to `(0, 0, 1)`, applied to `x`.
fn rotate_to_pole(c: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    // axis c × e3 = (c1, −c0, 0)
    let s = (c[0] * c[0] + c[1] * c[1]).sqrt();
    if s < 1e-15 {
        return if c[2] > 0.0 { x } else { [x[0], -x[1], -x[2]] };
    }
    let (ux, uy) = (c[1] / s, -c[0] / s);
    let (cos, sin) = (c[2], s);
    // Rodrigues with unit axis (ux, uy, 0)
    let dot = ux * x[0] + uy * x[1];
    let cross = [uy * x[2], -ux * x[2], ux * x[1] - uy * x[0]];
    let mut out = [0.0; 3];
    let u = [ux, uy, 0.0];
    for i in 0..3 {
        out[i] = x[i] * cos + cross[i] * sin + u[i] * dot * (1.0 - cos);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{triangle_angles_and_sides, triangle_area};
    use approx::assert_relative_eq;

    #[test]
    fn angles_reproduced() {
        let cases = [
            (-1.0, [PI / 2.0, PI / 6.0, PI / 6.0]),
            (-0.5, [0.6 * PI, 0.1 * PI, 0.2 * PI]),
            (0.0, [PI / 2.0, PI / 4.0, PI / 4.0]),
            (1.0, [PI / 2.0; 3]),
            (0.7, [PI / 3.0, PI / 2.0, PI / 2.0]),
        ];
        for (k, a) in cases {
            let t = triangle_from_angles(Curvature::new(k).unwrap(), a, [Bc::Neumann; 3]).unwrap();
            assert!(t.is_ccw());
            for i in 0..3 {
                assert_relative_eq!(t.angles[i], a[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn octant_area() {
        let t = triangle_from_angles(Curvature::new(1.0).unwrap(), [PI / 2.0; 3], [Bc::Neumann; 3]).unwrap();
        assert_relative_eq!(triangle_area(&t).unwrap(), PI / 2.0, epsilon = 1e-12);
        let s = triangle_angles_and_sides(&t).unwrap();
        for x in s.sides {
            assert_relative_eq!(x, PI / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ambient_roundtrip() {
        let k = Curvature::new(-0.8).unwrap();
        let p = ChartPoint::klein(0.4, -0.3);
        let q = from_ambient(k, to_ambient(k, &p).unwrap()).unwrap();
        assert_relative_eq!(q.x, p.x, epsilon = 1e-14);
        assert_relative_eq!(q.y, p.y, epsilon = 1e-14);
    }
}
