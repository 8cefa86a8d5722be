//! Acceptance criteria. Each prints one pass/fail line; the test fails if
//! any criterion fails.

use curvspec::analysis::{recover_gradient_unconstrained, recover_gradient_with};
use curvspec::continuation::{step_halving, sweep, track_critical_points, CurvaturePath, SweepOptions};
use curvspec::fem::{assemble_mesh, solve_smallest};
use curvspec::geometry::{triangle_area, Bc, ChartPoint, Curvature, GeodesicTriangle};
use curvspec::mesh::{generate, refine, TriangleMesh};
use curvspec::theorems::{
    run_suite, test_function_errors, test_function_size, ClaimId, FamilyCounts, Settings, Status, SuiteName, SuiteReport,
    Verdict,
};
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

type Outcome = (bool, String);

fn ladder(t: &GeodesicTriangle, h: f64, grading: f64, levels: usize) -> Vec<TriangleMesh> {
    let mut out = vec![generate(t, h, grading).unwrap()];
    for _ in 1..levels {
        let next = refine(out.last().unwrap()).unwrap();
        out.push(next);
    }
    out
}

fn euclid(v: [[f64; 2]; 3]) -> GeodesicTriangle {
    let k = Curvature::new(0.0).unwrap();
    GeodesicTriangle::new(k, v.map(|[x, y]| ChartPoint::klein(x, y)), [Bc::Neumann; 3]).unwrap()
}

fn mu2_errors(t: &GeodesicTriangle, exact: f64, h: f64) -> (Vec<f64>, f64) {
    let errs: Vec<f64> = ladder(t, h, 1.0, 3)
        .iter()
        .map(|m| {
            let s = solve_smallest(&assemble_mesh(m).unwrap(), 3, 1e-11).unwrap();
            (s.pairs[1].value - exact).abs() / exact
        })
        .collect();
    let order = (errs[1] / errs[2]).log2();
    (errs, order)
}

fn criterion_1() -> Outcome {
    let cases = [
        ("right isosceles", euclid([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), PI * PI, 0.05),
        ("equilateral", euclid([[0.0, 0.0], [1.0, 0.0], [0.5, 0.75f64.sqrt()]]), 16.0 * PI * PI / 9.0, 0.05),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, t, exact, h) in cases {
        let (errs, order) = mu2_errors(&t, exact, h);
        let fine = *errs.last().unwrap();
        ok &= fine < 1e-3 && (1.8..=2.2).contains(&order);
        detail.push(format!("{name}: rel err {fine:.2e}, order {order:.3}"));
    }
    (ok, detail.join("; "))
}

fn suite(name: SuiteName) -> SuiteReport {
    run_suite(name, &Settings::default(), 0, FamilyCounts::default(), None).unwrap()
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let r = suite(SuiteName::Onequarter);
    let secs = t0.elapsed().as_secs_f64();
    let min = r
        .cases
        .iter()
        .flat_map(|c| c.artifacts.iter().map(|a| a.values[1]))
        .fold(f64::INFINITY, f64::min);
    let ok = r.cases.len() == 20 && r.cases.iter().all(|c| c.artifacts.len() == 2) && min > 0.26 && secs <= 180.0;
    (ok, format!("{} cases, min mu2 {min:.4} over both levels, {secs:.1} s", r.cases.len()))
}

fn criterion_3() -> Outcome {
    let r = suite(SuiteName::MixedIneq);
    let claims: Vec<_> = r.cases.iter().flat_map(|c| &c.claims).collect();
    let violations = claims.iter().filter(|c| c.status != Status::Pass).count();
    let ok = r.cases.len() == 20 && claims.len() == 60 && violations == 0;
    let min = claims.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    (ok, format!("{} comparisons, {violations} violations, smallest slack {min:.3e}", claims.len()))
}

fn criterion_4() -> Outcome {
    let k = Curvature::new(-1.0).unwrap();
    let t = GeodesicTriangle::new(
        k,
        [ChartPoint::halfplane(0.0, 1.0), ChartPoint::halfplane(0.0, 2.0), ChartPoint::halfplane(0.6, 1.5)],
        [Bc::Neumann; 3],
    )
    .unwrap();
    let rows = test_function_errors(&t, 0.3, test_function_size(&t).unwrap(), 3).unwrap();
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[0].error / w[1].error).collect();
    let ok = ratios.iter().all(|&r| r >= 3.0);
    let errs: Vec<String> = rows.iter().map(|r| format!("{:.2e}", r.error)).collect();
    (ok, format!("errors [{}], shrink factors {:?}", errs.join(", "), ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()))
}

fn criterion_5() -> Outcome {
    let r = suite(SuiteName::NeumannNonacute);
    let mut ok = r.cases.len() == 20 && r.verdict() == Verdict::Pass;
    for c in &r.cases {
        ok &= c.asserted && c.claims.len() == 5 && c.all_pass();
        ok &= c
            .artifacts
            .iter()
            .all(|a| a.critical.is_some_and(|k| k.interior == 0 && k.edge == 0 && k.continua == 0));
    }
    let slack = r
        .cases
        .iter()
        .filter_map(|c| c.claim(ClaimId::KillingCertificate))
        .map(|c| c.margin)
        .fold(f64::INFINITY, f64::min);
    let gap = r
        .cases
        .iter()
        .filter_map(|c| c.claim(ClaimId::SimpleEigenvalue))
        .map(|c| c.margin)
        .fold(f64::INFINITY, f64::min);
    (ok, format!("{} cases, smallest Killing slack {slack:.3e}, smallest gap margin {gap:.3e}", r.cases.len()))
}

fn criterion_6() -> Outcome {
    let single = suite(SuiteName::MixedSingle);
    let double = suite(SuiteName::MixedDouble);
    let mut ok = single.verdict() == Verdict::Pass && double.verdict() == Verdict::Pass;
    for c in single.cases.iter().filter(|c| c.asserted) {
        ok &= [ClaimId::NoCriticalPoints, ClaimId::NeumannVertexMax]
            .iter()
            .all(|&id| c.claim(id).is_some_and(|r| r.status == Status::Pass));
    }
    for c in double.cases.iter().filter(|c| c.asserted) {
        ok &= c
            .claim(ClaimId::SingleNeumannEdgeCritical)
            .is_some_and(|r| r.status == Status::Pass && r.levels.len() == 2);
        ok &= c.artifacts.iter().all(|a| a.critical.is_some_and(|k| k.interior == 0 && k.edge == 1));
    }
    let flat = double.cases.iter().find(|c| c.triangle.curvature == 0.0);
    let location = flat.and_then(|c| c.claim(ClaimId::CriticalPointLocation));
    ok &= location.is_some_and(|r| r.status == Status::Pass);
    let detail = location
        .and_then(|r| r.levels.last())
        .and_then(|l| l.detail.clone())
        .unwrap_or_else(|| "no flat control".into());
    (
        ok,
        format!(
            "{} single-D and {} double-D cases; flat control {detail}",
            single.cases.len(),
            double.cases.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let r = suite(SuiteName::Finiteness);
    let exception = r.cases.iter().find(|c| c.name == "finiteness_exception");
    let perturbed = r.cases.iter().find(|c| c.triangle.curvature > 0.0 && c.name == "finiteness");
    let (Some(e), Some(p)) = (exception, perturbed) else {
        return (false, "suite lacks the spherical cases".into());
    };
    let on_base = e.claim(ClaimId::ContinuumOnBase).is_some_and(|c| c.status == Status::Pass);
    let latitude = e.claim(ClaimId::LatitudeConstancy);
    let constant = latitude.is_some_and(|c| c.status == Status::Pass);
    let cleared = p.claim(ClaimId::NoContinuum).is_some_and(|c| c.status == Status::Pass);
    let variation = latitude.map_or(f64::NAN, |c| c.tolerance - c.margin);
    (
        on_base && constant && cleared && r.verdict() == Verdict::Pass,
        format!("continuum on base {on_base}, latitude variation {variation:.2e}, perturbed flag cleared {cleared}"),
    )
}

fn criterion_8() -> Outcome {
    let path = CurvaturePath {
        vertices: [[0.0, 0.0], [0.5, 0.0], [-0.2, 0.4]],
        bc: [Bc::Neumann; 3],
        kappa_start: 0.0,
        kappa_end: -1.0,
    };
    let o = SweepOptions::default();
    let (coarse, _, check) = step_halving(&path, &o).unwrap();
    let pers = track_critical_points(&coarse);
    let crossings = coarse.crossings_of(coarse.tracked);
    let again = sweep(&path, &o).unwrap();
    let ok = crossings == 0
        && pers.expects_zero
        && pers.zero_everywhere == Some(true)
        && check.consistent
        && again.branch(1) == coarse.branch(1);
    (
        ok,
        format!(
            "{} steps, {crossings} crossings, counts zero {:?}, halving diff {:.1e} (tol {:.0e})",
            coarse.steps.len(),
            pers.zero_everywhere,
            check.max_rel_diff,
            check.tolerance
        ),
    )
}

fn max_gradient_error(m: &TriangleMesh, g: &[[f64; 2]], exact: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    m.nodes
        .iter()
        .zip(g)
        .map(|(p, g)| {
            let e = exact(*p);
            (g[0] - e[0]).hypot(g[1] - e[1])
        })
        .fold(0.0, f64::max)
}

fn order(e: &[f64]) -> f64 {
    (e[e.len() - 2] / e[e.len() - 1]).log2()
}

fn criterion_9() -> Outcome {
    // Neumann data: the second eigenfunction of the right isosceles triangle
    let square = euclid([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    let neumann: Vec<f64> = ladder(&square, 0.05, 1.0, 3)
        .iter()
        .map(|m| {
            let u: Vec<f64> = m.nodes.iter().map(|p| (PI * p[0]).cos() - (PI * p[1]).cos()).collect();
            let g = recover_gradient_with(&u, m, [Bc::Neumann; 3]).unwrap();
            max_gradient_error(m, &g, |p| [-PI * (PI * p[0]).sin(), PI * (PI * p[1]).sin()])
        })
        .collect();
    // generic data on a hyperbolic triangle, chart coordinates
    let k = Curvature::new(-1.0).unwrap();
    let t = GeodesicTriangle::new(
        k,
        [ChartPoint::poincare(-0.3, -0.2), ChartPoint::poincare(0.4, -0.1), ChartPoint::poincare(0.0, 0.45)],
        [Bc::Neumann; 3],
    )
    .unwrap();
    let meshes = ladder(&t, 0.04, 1.0, 3);
    let generic: Vec<f64> = meshes
        .iter()
        .map(|m| {
            let u: Vec<f64> = m.nodes.iter().map(|p| (2.0 * p[0] + 1.0).sin() * (3.0 * p[1]).cos()).collect();
            let g = recover_gradient_unconstrained(&u, m).unwrap();
            max_gradient_error(m, &g, |p| {
                [
                    2.0 * (2.0 * p[0] + 1.0).cos() * (3.0 * p[1]).cos(),
                    -3.0 * (2.0 * p[0] + 1.0).sin() * (3.0 * p[1]).sin(),
                ]
            })
        })
        .collect();
    // Gauss-Bonnet: area = π − angle sum at κ = −1
    let exact = triangle_area(&t).unwrap();
    let gb = PI - t.angles.iter().sum::<f64>();
    let area: Vec<f64> = meshes
        .iter()
        .map(|m| (assemble_mesh(m).unwrap().metric_area() - exact).abs() / exact)
        .collect();
    let (on, og, oa) = (order(&neumann), order(&generic), order(&area));
    let ok = on >= 1.5 && og >= 1.5 && oa >= 1.8 && (exact - gb).abs() < 1e-12;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join("/");
    (
        ok,
        format!(
            "gradient errors neumann {} order {on:.2}, generic {} order {og:.2}; mass total {} order {oa:.2}",
            fmt(&neumann),
            fmt(&generic),
            fmt(&area)
        ),
    )
}

fn run_verify(dir: &Path, config: &Path, jobs: usize) -> std::process::ExitStatus {
    Command::new(env!("CARGO_BIN_EXE_curvspec"))
        .args(["verify", "--config"])
        .arg(config)
        .arg("--out")
        .arg(dir)
        .args(["--jobs", &jobs.to_string()])
        .status()
        .unwrap()
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["neumann_nonacute", "onequarter"] {
        let cfg = tmp.path().join(format!("{name}.json"));
        std::fs::write(&cfg, format!(r#"{{"suite": {{"name": "{name}", "seed": 3}}}}"#)).unwrap();
        let runs: Vec<_> = [(1, "a"), (8, "b"), (8, "c")]
            .iter()
            .map(|&(jobs, tag)| {
                let dir = tmp.path().join(format!("{name}-{tag}"));
                let status = run_verify(&dir, &cfg, jobs);
                let files = ["suite.json", "summary.csv"].map(|f| std::fs::read(dir.join(f)).unwrap_or_default());
                (status.code(), files)
            })
            .collect();
        let same = runs.windows(2).all(|w| w[0] == w[1]) && !runs[0].1[0].is_empty();
        ok &= same;
        detail.push(format!("{name}: exit {:?}, identical {same}", runs[0].0));
    }
    (ok, detail.join("; "))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("euclidean eigenvalue oracles", criterion_1),
        ("one-quarter bound", criterion_2),
        ("mixed inequality", criterion_3),
        ("exact test function", criterion_4),
        ("non-acute neumann suite", criterion_5),
        ("mixed boundary suites", criterion_6),
        ("finiteness exception", criterion_7),
        ("curvature continuation", criterion_8),
        ("gradient recovery and area", criterion_9),
        ("determinism across job counts", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (ok, detail) = f();
        println!(
            "criterion {:>2} {}: {name}: {detail} [{:.1} s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
