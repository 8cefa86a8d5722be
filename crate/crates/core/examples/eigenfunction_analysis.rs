//! Nodal line, critical points, vertex expansions and a Killing certificate
//! for the second Neumann eigenfunction of an obtuse hyperbolic triangle.
//!
//! cargo run --release --example eigenfunction_analysis

use curvspec::analysis::{detect_critical_points, extract_nodal_set, vertex_coefficients};
use curvspec::fem::{assemble_mesh, solve_smallest};
use curvspec::geometry::{Bc, ChartPoint, Curvature, GeodesicTriangle};
use curvspec::mesh::generate;
use curvspec::theorems::killing_summary;

fn main() -> curvspec::Result<()> {
    let kappa = Curvature::new(-1.0)?;
    let t = GeodesicTriangle::new(
        kappa,
        [ChartPoint::klein(0.0, 0.0), ChartPoint::klein(0.5, 0.0), ChartPoint::klein(-0.2, 0.4)],
        [Bc::Neumann; 3],
    )?;
    let m = generate(&t, 0.008, 2.0)?;
    let s = solve_smallest(&assemble_mesh(&m)?, 3, 1e-10)?;
    let u = &s.pairs[1];
    println!("mu2 = {:.8} on {} nodes", u.value, m.n_nodes());

    let nodal = extract_nodal_set(u, &m);
    println!("nodal set: {:?}", nodal.topology);

    let crit = detect_critical_points(u, &m, None)?;
    println!(
        "critical points: {} interior, {} on edges, {} continua (gradient tolerance {:.2e})",
        crit.counts.interior, crit.counts.edge, crit.counts.continua, crit.tolerances.gradient
    );

    // fit radii are 6h and 12h; coarse meshes cannot fit them into short corners
    for v in 0..3 {
        match vertex_coefficients(u, &m, v) {
            Ok(e) => println!(
                "vertex {v}: beta/pi {:.4}, nu {:.4}, coefficients {:?} +- {:?}",
                e.beta / std::f64::consts::PI,
                e.nu,
                e.coefficients.iter().map(|c| format!("{c:+.4e}")).collect::<Vec<_>>(),
                e.uncertainty.iter().map(|c| format!("{c:.1e}")).collect::<Vec<_>>()
            ),
            Err(e) => println!("vertex {v}: {e}"),
        }
    }

    let k = killing_summary(&m, u, 1e-6)?;
    println!("Killing certificate: certified {}, slack {:+.3e}, field {:?}", k.certified, k.slack, k.field);
    Ok(())
}
