//! Charts, distances and triangle invariants at a few curvatures.
//!
//! cargo run --example geometry

use curvspec::geometry::{
    chart_convert, classify_triangle, geodesic_distance, triangle_angles_and_sides, triangle_area, Bc, Chart,
    ChartPoint, Curvature, GeodesicTriangle,
};
use std::f64::consts::PI;

fn main() -> curvspec::Result<()> {
    let vertices = [[0.0, 0.0], [0.5, 0.0], [-0.2, 0.4]];
    for k in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let kappa = Curvature::new(k)?;
        let t = GeodesicTriangle::new(kappa, vertices.map(|[x, y]| ChartPoint::klein(x, y)), [Bc::Neumann; 3])?;
        let sides = triangle_angles_and_sides(&t)?;
        let sum: f64 = t.angles.iter().sum();
        println!(
            "kappa {k:+.1} ell {:+.4}: angles/pi {:.4} {:.4} {:.4} (sum - pi = {:+.5}), area {:.5}, {:?}",
            kappa.ell(),
            t.angles[0] / PI,
            t.angles[1] / PI,
            t.angles[2] / PI,
            sum - PI,
            triangle_area(&t)?,
            classify_triangle(&t)
        );
        println!("    sides {:?}", sides.sides.map(|s| (s * 1e5).round() / 1e5));
    }

    // the same two points seen from all three hyperbolic charts
    let kappa = Curvature::new(-1.0)?;
    let (p, q) = (ChartPoint::halfplane(0.0, 1.0), ChartPoint::halfplane(1.0, 2.0));
    for chart in [Chart::HalfPlane, Chart::PoincareDisk, Chart::Klein] {
        let (a, b) = (chart_convert(p, chart, kappa)?, chart_convert(q, chart, kappa)?);
        println!(
            "{chart:?}: ({:.5}, {:.5}) to ({:.5}, {:.5}), distance {:.12}",
            a.x,
            a.y,
            b.x,
            b.y,
            geodesic_distance(kappa, &a, &b)?
        );
    }
    Ok(())
}
