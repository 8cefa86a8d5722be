//! Runs a verification suite and prints its claim summary.
//!
//! cargo run --release --example verify_suite -- onequarter 7

use curvspec::theorems::{run_suite, FamilyCounts, Settings, Status, SuiteName};

fn main() -> curvspec::Result<()> {
    let mut args = std::env::args().skip(1);
    let name: SuiteName = serde_json::from_value(serde_json::Value::String(
        args.next().unwrap_or_else(|| "neumann_nonacute".into()),
    ))?;
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));
    let counts = FamilyCounts {
        hyperbolic: 6,
        mixed: 4,
        spherical: 4,
    };
    let r = run_suite(name, &Settings::default(), seed, counts, None)?;
    print!("{}", r.summary_csv());
    for c in &r.cases {
        let failing: Vec<_> = c.claims.iter().filter(|x| x.status != Status::Pass).map(|x| x.claim.as_str()).collect();
        if !failing.is_empty() {
            println!("case {} ({}): {failing:?}", c.id, c.name);
        }
    }
    println!("verdict: {:?}", r.verdict());
    Ok(())
}
