//! Deterministic triangle families from a Halton sequence over angle
//! parameters. The seed offsets the sequence index.

use crate::geometry::{triangle_from_angles, Bc, ChartPoint, Curvature, GeodesicTriangle};
use crate::Result;
use std::f64::consts::{FRAC_PI_2, PI};

const N3: [Bc; 3] = [Bc::Neumann; 3];

/// Radical inverse of `i` in `base`.
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn point(seed: u64, j: usize) -> [f64; 3] {
    let i = seed + j as u64 + 1;
    [halton(i, 2), halton(i, 3), halton(i, 5)]
}

fn kappa(v: f64) -> Curvature {
    Curvature::new(v).expect("fixed curvature in range")
}

/// Non-acute κ = −1 triangles: largest angle in `[π/2, 0.7π)`, angle defect
/// in `[0.04π, 0.14π)`, the remainder split between the other two.
pub fn hyperbolic_family(n: usize, seed: u64) -> Result<Vec<GeodesicTriangle>> {
    (0..n)
        .map(|j| {
            let [u1, u2, u3] = point(seed, j);
            let a = PI * (0.5 + 0.2 * u1);
            let d = PI * (0.04 + 0.10 * u2);
            let rem = PI - d - a;
            let b = rem * (0.3 + 0.4 * u3);
            triangle_from_angles(kappa(-1.0), [a, b, rem - b], N3)
        })
        .collect()
}

/// κ = −1 triangles with acute or obtuse first angle and acute others.
/// Single-Dirichlet cases put the Dirichlet edge opposite vertex 1 or 2
/// alternately; double-Dirichlet cases keep edge 0 Neumann.
pub fn mixed_family(n: usize, seed: u64, double: bool) -> Result<Vec<GeodesicTriangle>> {
    use Bc::{Dirichlet as D, Neumann as N};
    (0..n)
        .map(|j| {
            let [u1, u2, u3] = point(seed, j);
            let a = PI * (0.3 + 0.35 * u1);
            let d = PI * (0.04 + 0.10 * u2);
            let rem = PI - d - a;
            let b = rem * (0.3 + 0.4 * u3);
            let bc = match (double, j % 2) {
                (true, _) => [N, D, D],
                (false, 0) => [N, D, N],
                (false, _) => [N, N, D],
            };
            triangle_from_angles(kappa(-1.0), [a, b, rem - b], bc)
        })
        .collect()
}

/// Fixed control triangles appended to the mixed suites.
pub(crate) fn mixed_controls(double: bool) -> Result<Vec<GeodesicTriangle>> {
    use Bc::{Dirichlet as D, Neumann as N};
    let k = |x: f64, y: f64| ChartPoint::klein(x, y);
    if double {
        Ok(vec![
            GeodesicTriangle::new(kappa(0.0), [k(0.0, 0.0), k(1.0, 0.0), k(1.0, 1.0)], [D, N, D])?,
            triangle_from_angles(kappa(1.0), [FRAC_PI_2; 3], [D, D, N])?,
        ])
    } else {
        Ok(vec![
            GeodesicTriangle::new(kappa(-1.0), [k(0.0, 0.0), k(0.5, 0.0), k(-0.2, 0.4)], [N, D, N])?,
            GeodesicTriangle::new(kappa(0.0), [k(0.0, 0.0), k(1.0, 0.0), k(0.3, 0.8)], [D, N, N])?,
        ])
    }
}

/// κ = 1 triangles: first angle in `[0.35π, 0.6π)`, angle excess in
/// `[0.05π, 0.2π)`.
pub fn spherical_family(n: usize, seed: u64) -> Result<Vec<GeodesicTriangle>> {
    (0..n)
        .map(|j| {
            let [u1, u2, u3] = point(seed, j);
            let a = PI * (0.35 + 0.25 * u1);
            let e = PI * (0.05 + 0.15 * u2);
            let rem = PI + e - a;
            let b = rem * (0.3 + 0.4 * u3);
            triangle_from_angles(kappa(1.0), [a, b, rem - b], N3)
        })
        .collect()
}

/// κ = 1 isosceles triangle with apex angle π/3 at vertex 0 and the given
/// base angles; edge 0 is the base.
pub fn exception_triangle(base: f64) -> Result<GeodesicTriangle> {
    triangle_from_angles(kappa(1.0), [PI / 3.0, base, base], N3)
}
