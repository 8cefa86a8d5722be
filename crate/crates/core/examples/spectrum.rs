//! Neumann and mixed spectra of the right isosceles triangle against the
//! closed-form values, over a refinement ladder.
//!
//! cargo run --release --example spectrum

use curvspec::fem::{assemble_mesh, observed_order, solve_smallest};
use curvspec::geometry::{Bc, ChartPoint, Curvature, GeodesicTriangle};
use curvspec::mesh::ladder;
use std::f64::consts::PI;

fn main() -> curvspec::Result<()> {
    let flat = Curvature::new(0.0)?;
    let v = [ChartPoint::klein(0.0, 0.0), ChartPoint::klein(1.0, 0.0), ChartPoint::klein(0.0, 1.0)];
    let t = GeodesicTriangle::new(flat, v, [Bc::Neumann; 3])?;
    let exact = [0.0, PI * PI, 2.0 * PI * PI, 4.0 * PI * PI];
    let mut mu2 = Vec::new();
    for m in ladder(&t, 0.05, 1.0, 3)? {
        let s = solve_smallest(&assemble_mesh(&m)?, 4, 1e-11)?;
        println!("h {:.4}: {:?}", m.h, s.values().iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>());
        mu2.push(s.pairs[1].value);
    }
    println!("exact      {:?}", exact.map(|x| format!("{x:.6}")));
    println!("observed order of mu2: {:.3}", observed_order([mu2[0], mu2[1], mu2[2]]));

    // Dirichlet on the hypotenuse only
    let mixed = t.with_bc([Bc::Dirichlet, Bc::Neumann, Bc::Neumann]);
    let m = ladder(&mixed, 0.05, 2.0, 2)?.pop().expect("two levels");
    let s = solve_smallest(&assemble_mesh(&m)?, 3, 1e-11)?;
    print!("mixed spectrum, csv:\n{}", s.to_csv());
    Ok(())
}
