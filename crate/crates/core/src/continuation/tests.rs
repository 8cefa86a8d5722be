use super::*;

fn obtuse(bc: [Bc; 3], k0: f64, k1: f64) -> CurvaturePath {
    CurvaturePath {
        vertices: [[0.0, 0.0], [0.5, 0.0], [-0.2, 0.4]],
        bc,
        kappa_start: k0,
        kappa_end: k1,
    }
}

fn quick(steps: usize) -> SweepOptions {
    SweepOptions {
        steps,
        h_rel: 0.08,
        ..SweepOptions::default()
    }
}

#[test]
fn assignment_follows_overlap() {
    let o = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.1, 0.95],
        vec![0.0, 0.97, 0.2],
    ];
    assert_eq!(best_assignment(&[0, 1, 2], &o), vec![0, 2, 1]);
    // previous branches already permuted
    assert_eq!(best_assignment(&[0, 2, 1], &o), vec![0, 1, 2]);
}

#[test]
fn mesh_kappa_is_direction_free() {
    let p = obtuse([Bc::Neumann; 3], 0.0, -1.0);
    assert_eq!(p.mesh_kappa(), 0.0);
    assert_eq!(p.reversed().mesh_kappa(), 0.0);
    let q = obtuse([Bc::Neumann; 3], -0.5, 0.5);
    assert_eq!(q.mesh_kappa(), q.reversed().mesh_kappa());
}

#[test]
fn flat_path_is_constant() {
    let p = obtuse([Bc::Neumann; 3], 0.0, 0.0);
    let d = sweep(&p, &quick(4)).unwrap();
    assert_eq!(d.steps.len(), 5);
    for b in 0..4 {
        let v = d.branch(b);
        for x in &v {
            assert!((x - v[0]).abs() <= 1e-8 * v[0].abs().max(1.0), "{v:?}");
        }
    }
    assert!(d.events().is_empty());
}

#[test]
fn obtuse_hyperbolic_path_has_no_crossings_or_critical_points() {
    let p = obtuse([Bc::Neumann; 3], 0.0, -1.0);
    let d = sweep(&p, &quick(8)).unwrap();
    assert_eq!(d.tracked, 1);
    assert_eq!(d.crossings_of(1), 0);
    for s in &d.steps {
        let mut sorted: Vec<f64> = (0..4).map(|b| s.branch_value(b)).collect();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, s.values);
        assert!(s.overlap.iter().all(|&o| o >= 0.9));
    }
    // the second Neumann eigenvalue decreases as the metric spreads out
    let mu = d.branch(1);
    assert!(mu.windows(2).all(|w| w[1] < w[0]), "{mu:?}");
    let pers = track_critical_points(&d);
    assert!(pers.expects_zero);
    assert_eq!(pers.zero_everywhere, Some(true));
    assert!(pers.events.is_empty());
}

#[test]
fn reversed_path_returns_the_same_branches() {
    let p = obtuse([Bc::Neumann; 3], 0.0, -1.0);
    let o = quick(4);
    let a = sweep(&p, &o).unwrap();
    let b = sweep(&p.reversed(), &o).unwrap();
    for (sa, sb) in a.steps.iter().zip(b.steps.iter().rev()) {
        assert!((sa.kappa - sb.kappa).abs() < 1e-15);
        for (x, y) in sa.values.iter().zip(&sb.values) {
            assert!((x - y).abs() <= 2.0 * o.solver.tol * x.abs().max(1.0), "{x} {y}");
        }
    }
}

#[test]
fn step_halving_agrees() {
    let p = obtuse([Bc::Neumann; 3], 0.0, -1.0);
    let (c, f, check) = step_halving(&p, &quick(4)).unwrap();
    assert_eq!(c.steps.len(), 5);
    assert_eq!(f.steps.len(), 9);
    assert_eq!(check.shared_steps, 5);
    assert!(check.consistent, "{check:?}");
    assert!(check.slope_fine <= 2.0 * check.slope_coarse);
}

#[test]
fn mixed_single_path_has_no_critical_points() {
    use Bc::{Dirichlet as D, Neumann as N};
    let p = obtuse([N, D, N], 0.0, -1.0);
    let d = sweep(&p, &quick(4)).unwrap();
    assert_eq!(d.tracked, 0);
    let pers = track_critical_points(&d);
    assert!(pers.expects_zero);
    assert_eq!(pers.zero_everywhere, Some(true));
}

#[test]
fn acute_control_edge_point_persists() {
    // acute Euclidean triangle, tiny curvature step; observation only
    let p = CurvaturePath {
        vertices: [[0.0, 0.0], [0.6, 0.0], [0.25, 0.45]],
        bc: [Bc::Neumann; 3],
        kappa_start: 0.0,
        kappa_end: -0.01,
    };
    let d = sweep(&p, &quick(2)).unwrap();
    let pers = track_critical_points(&d);
    assert!(!pers.expects_zero);
    assert_eq!(pers.zero_everywhere, None);
    assert_eq!(pers.rows.len(), 3);
    for w in pers.rows.windows(2) {
        if w[0].count == w[1].count {
            assert!(w[1].matched.iter().all(Option::is_some), "{pers:?}");
        }
    }
}

#[test]
fn csv_has_one_row_per_branch_and_step() {
    let p = obtuse([Bc::Neumann; 3], 0.0, -0.5);
    let d = sweep(&p, &quick(2)).unwrap();
    let csv = d.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,kappa,branch,value,overlap,crit_count");
    assert_eq!(lines.len(), 1 + 3 * 4);
    assert!(lines[2].ends_with(",0"));
    assert_eq!(lines[1].split(',').nth(5), Some(""));
}

#[test]
fn invalid_options_are_config_errors() {
    let p = obtuse([Bc::Neumann; 3], 0.0, -1.0);
    let bad = SweepOptions { k: 0, ..quick(2) };
    assert!(matches!(sweep(&p, &bad), Err(Error::Config(_))));
    let bad = SweepOptions { tracked: Some(9), ..quick(2) };
    assert!(matches!(sweep(&p, &bad), Err(Error::Config(_))));
    let far = CurvaturePath { kappa_end: -2.0, ..p };
    assert!(sweep(&far, &quick(2)).is_err());
}

#[test]
fn leaving_the_klein_domain_is_a_step_failure() {
    // near the boundary of the κ = -1 Klein disk
    let p = CurvaturePath {
        vertices: [[0.0, 0.0], [0.9, 0.0], [0.0, 0.9]],
        bc: [Bc::Neumann; 3],
        kappa_start: 0.0,
        kappa_end: -1.3,
    };
    let (data, err) = sweep_partial(&p, &quick(4));
    assert!(matches!(err, Some(Error::StepFailure { .. })), "{err:?}");
    assert!(!data.unwrap().steps.is_empty());
}
