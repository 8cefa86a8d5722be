//! Killing fields along a triangle edge and about a point.
//!
//! cargo run --example killing_fields

use curvspec::geometry::{ChartPoint, Curvature};
use curvspec::killing::{killing_residual, KillingField};

fn main() -> curvspec::Result<()> {
    let kappa = Curvature::new(-1.0)?;
    let axis = [ChartPoint::klein(0.0, 0.0), ChartPoint::klein(0.5, 0.0)];
    let along = KillingField::along(kappa, axis, 1)?;
    let about = KillingField::elliptic(kappa, ChartPoint::klein(0.25, 0.0), 1)?;

    println!("translation along the edge from (0,0) to (0.5,0):");
    for s in [0.0, 0.25, 0.5, 0.75] {
        let p = ChartPoint::klein(s, 0.0);
        let v = along.evaluate(&p)?;
        let ang = along.angle_with_geodesic(axis, &p)?;
        println!("  at ({s:.2}, 0): X = ({:+.5}, {:+.5}), angle to edge {ang:.3e}", v[0], v[1]);
    }

    println!("rotation about (0.25, 0):");
    for s in [0.0, 0.1, 0.4, 0.6] {
        let p = ChartPoint::klein(s, 0.0);
        let ang = about.angle_with_geodesic(axis, &p)?;
        println!("  at ({s:.2}, 0): angle to edge {:.6} rad", ang);
    }

    let probe = ChartPoint::klein(0.1, 0.3);
    for (name, x) in [("translation", &along), ("rotation", &about)] {
        println!("{name}: Lie derivative of the metric at (0.1, 0.3) {:.2e}", killing_residual(x, &probe, 1e-5)?);
    }
    Ok(())
}
