//! Follows the low eigenvalues of a fixed Klein triangle as the curvature
//! goes from 0 to -1, then tracks critical points of the second branch.
//!
//! cargo run --release --example curvature_sweep

use curvspec::continuation::{step_halving, track_critical_points, CurvaturePath, SweepOptions};
use curvspec::geometry::Bc;

fn main() -> curvspec::Result<()> {
    let path = CurvaturePath {
        vertices: [[0.0, 0.0], [0.5, 0.0], [-0.2, 0.4]],
        bc: [Bc::Neumann; 3],
        kappa_start: 0.0,
        kappa_end: -1.0,
    };
    let o = SweepOptions {
        steps: 10,
        ..SweepOptions::default()
    };
    let (b, _, check) = step_halving(&path, &o)?;
    for s in &b.steps {
        println!(
            "kappa {:+.2}: {:?} min overlap {:.4}",
            s.kappa,
            s.values.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>(),
            s.overlap.iter().cloned().fold(f64::INFINITY, f64::min)
        );
    }
    println!("crossings of branch {}: {}", b.tracked, b.crossings_of(b.tracked));
    println!("step halving: max relative difference {:.2e}, consistent {}", check.max_rel_diff, check.consistent);
    let p = track_critical_points(&b);
    println!(
        "critical counts {:?}, expected zero {}, zero everywhere {:?}",
        p.rows.iter().map(|r| r.count).collect::<Vec<_>>(),
        p.expects_zero,
        p.zero_everywhere
    );
    Ok(())
}
