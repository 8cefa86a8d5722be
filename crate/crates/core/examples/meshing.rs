//! Graded meshes of an obtuse hyperbolic triangle and their refinements.
//!
//! cargo run --example meshing

use curvspec::geometry::{triangle_area, Bc, ChartPoint, Curvature, GeodesicTriangle};
use curvspec::mesh::ladder;

fn main() -> curvspec::Result<()> {
    let kappa = Curvature::new(-1.0)?;
    let t = GeodesicTriangle::new(
        kappa,
        [ChartPoint::klein(0.0, 0.0), ChartPoint::klein(0.5, 0.0), ChartPoint::klein(-0.2, 0.4)],
        [Bc::Neumann; 3],
    )?;
    let area = triangle_area(&t)?;
    for grading in [1.0, 2.0] {
        println!("grading {grading}:");
        for (level, m) in ladder(&t, 0.04, grading, 3)?.iter().enumerate() {
            m.validate()?;
            println!(
                "  level {level}: {:>6} nodes {:>6} elements, h {:.4}, min quality {:.3}, area error {:.2e}",
                m.n_nodes(),
                m.elements.len(),
                m.h,
                m.min_quality(),
                (m.metric_area() - area).abs() / area
            );
        }
    }
    Ok(())
}
