use super::*;
use crate::fem::{assemble_mesh, solve_smallest};
use crate::geometry::{Bc, ChartPoint, Curvature, GeodesicTriangle};
use crate::killing::KillingField;
use crate::mesh::{generate, refine};
use std::f64::consts::PI;

const N3: [Bc; 3] = [Bc::Neumann; 3];

fn tri(k: f64, v: [[f64; 2]; 3], bc: [Bc; 3]) -> GeodesicTriangle {
    GeodesicTriangle::new(Curvature::new(k).unwrap(), v.map(|[x, y]| ChartPoint::klein(x, y)), bc).unwrap()
}

fn iso() -> GeodesicTriangle {
    tri(0.0, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], N3)
}

fn u2(p: [f64; 2]) -> f64 {
    (PI * p[0]).cos() - (PI * p[1]).cos()
}

fn interp(m: &TriangleMesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    m.nodes.iter().map(|&p| f(p)).collect()
}

#[test]
fn linear_and_constant_gradients() {
    for k in [0.0, -1.0, 0.8] {
        let m = generate(&tri(k, [[0.0, 0.0], [0.5, 0.1], [0.1, 0.6]], N3), 0.05, 2.0).unwrap();
        let lin = interp(&m, |p| 2.0 * p[0] - 3.0 * p[1] + 0.5);
        let g = recover_gradient_with(&lin, &m, [Bc::Dirichlet; 3]).unwrap();
        for (i, gi) in g.iter().enumerate() {
            if !m.is_boundary(i) {
                assert!((gi[0] - 2.0).abs() < 1e-9 && (gi[1] + 3.0).abs() < 1e-9, "{gi:?}");
            }
        }
        let g = recover_gradient_with(&vec![1.0; m.n_nodes()], &m, N3).unwrap();
        assert!(g.iter().all(|v| v[0].abs() < 1e-10 && v[1].abs() < 1e-10));
    }
}

#[test]
fn recovered_gradient_order() {
    let m0 = generate(&iso(), 0.04, 1.0).unwrap();
    let m1 = refine(&m0).unwrap();
    let m2 = refine(&m1).unwrap();
    let err = |m: &TriangleMesh| {
        let g = recover_gradient_with(&interp(m, u2), m, N3).unwrap();
        (0..m.n_nodes())
            .filter(|&i| !m.is_boundary(i))
            .map(|i| {
                let p = m.nodes[i];
                let ex = [-PI * (PI * p[0]).sin(), PI * (PI * p[1]).sin()];
                (g[i][0] - ex[0]).hypot(g[i][1] - ex[1])
            })
            .fold(0.0, f64::max)
    };
    let e = [err(&m0), err(&m1), err(&m2)];
    assert!((e[0] / e[1]).log2() >= 1.5 && (e[1] / e[2]).log2() >= 1.5, "{e:?}");
}

#[test]
fn nodal_set_of_closed_form() {
    let m = generate(&iso(), 0.02, 1.0).unwrap();
    let v = interp(&m, u2);
    let ns = extract_nodal_set_with(&v, &m);
    let NodalTopology::SimpleArc { ends } = ns.topology else { panic!("{:?}", ns.topology) };
    let tags = [ends[0].tag, ends[1].tag];
    assert!(tags.contains(&EndTag::Vertex(0)) && tags.contains(&EndTag::Edge(0)), "{tags:?}");
    assert!(ns.ends_on_distinct_edges());
    assert!(ns.segments[0] >= 2);
    // Hausdorff distance to the segment from (0,0) to (1/2,1/2)
    let d_seg = |p: [f64; 2]| {
        let t = (0.5 * (p[0] + p[1])).clamp(0.0, 0.5);
        (p[0] - t).hypot(p[1] - t)
    };
    let line = &ns.polylines[0];
    let a = line.iter().map(|&p| d_seg(p)).fold(0.0, f64::max);
    let b = (0..=50)
        .map(|k| {
            let t = 0.5 * k as f64 / 50.0;
            line.iter().map(|q| (q[0] - t).hypot(q[1] - t)).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    assert!(a.max(b) < m.h, "{a} {b}");
    assert_eq!(nodal_domains(&v, &m), 2);
}

#[test]
fn closed_form_has_no_critical_points() {
    let m = generate(&iso(), 0.02, 1.0).unwrap();
    let r = detect_critical_points_with(&interp(&m, u2), &m, N3, None).unwrap();
    assert_eq!(r.counts, CriticalCounts { interior: 0, edge: 0, continua: 0 }, "{r:?}");
}

#[test]
fn detects_interior_and_edge_critical_points() {
    // an interior maximum at (0.3, 0.3) and a tangential extremum on y = 0 at x = 0.5
    let m = generate(&iso(), 0.02, 1.0).unwrap();
    let f = |p: [f64; 2]| -((p[0] - 0.3).powi(2) + (p[1] - 0.3).powi(2));
    let r = detect_critical_points_with(&interp(&m, f), &m, N3, None).unwrap();
    assert_eq!(r.counts.interior, 1, "{r:?}");
    let c = r.interior_points[0];
    assert_eq!(c.kind, CriticalKind::Max);
    assert!((c.location[0] - 0.3).hypot(c.location[1] - 0.3) < m.h);
    // tangential extrema at (0.3, 0) and (0, 0.3) on the legs and (0.5, 0.5) on the hypotenuse
    let on: Vec<_> = r.edge_points.iter().map(|e| (e.edge, e.location)).collect();
    assert_eq!(r.counts.edge, 3, "{on:?}");
    let expect = [(0, [0.5, 0.5]), (1, [0.0, 0.3]), (2, [0.3, 0.0])];
    for (e, q) in expect {
        let p = r.edge_points.iter().find(|c| c.edge == e).unwrap().location;
        assert!((p[0] - q[0]).hypot(p[1] - q[1]) < m.h, "{p:?}");
    }
}

#[test]
fn killing_derivatives_of_closed_form() {
    let m = generate(&iso(), 0.02, 1.0).unwrap();
    let v = interp(&m, u2);
    let grad = recover_gradient_with(&v, &m, N3).unwrap();
    let k0 = Curvature::new(0.0).unwrap();
    let axis = |a: [f64; 2], b: [f64; 2]| [ChartPoint::klein(a[0], a[1]), ChartPoint::klein(b[0], b[1])];
    let x = KillingField::along(k0, axis([0.0, 0.0], [1.0, -1.0]), -1).unwrap();
    let d = killing_derivative_with(&grad, &x, &m).unwrap();
    assert_eq!(certify_monotone(&d, 1e-6), Certification::Monotone(1));
    let d = killing_derivative_with(&grad, &x.negated().negated(), &m).unwrap();
    assert!(d.interior_min > 0.0);
    let y = KillingField::along(k0, axis([0.0, 0.0], [1.0, 1.0]), 1).unwrap();
    let dy = killing_derivative_with(&grad, &y, &m).unwrap();
    assert!(!certify_monotone(&dy, 1e-6).is_monotone());
    // rotation about the right-angle vertex is tangent to circles, normal to both legs
    let rot = KillingField::elliptic(k0, ChartPoint::klein(0.0, 0.0), 1).unwrap();
    let dr = killing_derivative_with(&grad, &rot, &m).unwrap();
    let tol = 1e-3 * dr.max_abs;
    for i in 0..m.n_nodes() {
        if m.node_edges[i] & 0b110 != 0 && m.nodes[i][0] < 0.9 && m.nodes[i][1] < 0.9 {
            assert!(dr.values[i].abs() < tol, "{} {:?}", dr.values[i], m.nodes[i]);
        }
    }
    let dz = killing_derivative_with(&vec![[0.0; 2]; m.n_nodes()], &x, &m).unwrap();
    assert!(dz.values.iter().all(|&v| v == 0.0));
    assert!(!certify_monotone(&dz, 1e-6).is_monotone());
}

#[test]
fn vertex_expansion_of_closed_form() {
    let m = generate(&iso(), 0.005, 1.0).unwrap();
    let e = vertex_coefficients_with(&interp(&m, u2), &m, N3, 0, [6.0 * m.h, 12.0 * m.h]).unwrap();
    assert!((e.nu - 2.0).abs() < 1e-12);
    assert!(e.coefficients[0].abs() < 0.05 * PI * PI / 2.0, "{e:?}");
    assert!((e.coefficients[1] + PI * PI / 2.0).abs() < 0.05 * PI * PI / 2.0, "{e:?}");
    let one = vertex_coefficients_with(&vec![1.0; m.n_nodes()], &m, N3, 1, [0.03, 0.06]).unwrap();
    // a1 carries rounding amplified by r^-nu
    assert!((one.coefficients[0] - 1.0).abs() < 1e-12 && one.coefficients[1].abs() < 1e-9, "{one:?}");
    assert!(matches!(
        vertex_coefficients_with(&vec![1.0; m.n_nodes()], &m, N3, 0, [0.3, 0.6]),
        Err(crate::Error::RadiiOutsideTriangle { vertex: 0 })
    ));
}

#[test]
fn first_mixed_eigenfunction() {
    let bc = [Bc::Dirichlet, Bc::Neumann, Bc::Dirichlet];
    let t = tri(-1.0, [[0.0, 0.0], [0.6, 0.0], [0.1, 0.5]], bc);
    let m = generate(&t, 0.01, 2.0).unwrap();
    let s = solve_smallest(&assemble_mesh(&m).unwrap(), 2, 1e-10).unwrap();
    let u = &s.pairs[0];
    assert!(matches!(extract_nodal_set(u, &m).topology, NodalTopology::Empty));
    for v in 0..3 {
        if t.vertex_kind(v) == crate::geometry::VertexKind::Mixed {
            let e = vertex_coefficients(u, &m, v).unwrap();
            assert!(e.coefficients[0].abs() > 10.0 * e.uncertainty[0], "{e:?}");
        }
    }
}

#[test]
fn hyperbolic_obtuse_eigenfunction() {
    let t = tri(-1.0, [[0.0, 0.0], [0.5, 0.0], [-0.2, 0.4]], N3);
    let m = generate(&t, 0.02, 2.0).unwrap();
    let p = assemble_mesh(&m).unwrap();
    let s = solve_smallest(&p, 4, 1e-9).unwrap();
    let u = &s.pairs[1];
    let r = detect_critical_points(u, &m, None).unwrap();
    assert_eq!(r.total(), 0, "{:?}", r.counts);
    assert!(r.continua.is_empty());
    let z = extract_nodal_set(u, &m);
    assert!(matches!(z.topology, NodalTopology::SimpleArc { .. }), "{:?}", z.topology);
    assert!(z.ends_on_distinct_edges());
    let mut certified = false;
    for e in 0..3 {
        let (a, b) = GeodesicTriangle::edge_vertices(e);
        for o in [1, -1] {
            let x = KillingField::loxodromic(t.kappa, [t.vertices[a], t.vertices[b]], o).unwrap();
            let d = killing_derivative(u, &x, &m).unwrap();
            let c = certify_monotone(&d, 1e-6);
            certified |= c.is_monotone();
        }
    }
    assert!(certified);
}
