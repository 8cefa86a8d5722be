use curvspec::analysis::{extract_nodal_set, nodal_domains};
use curvspec::fem::{assemble_mesh, solve_smallest};
use curvspec::geometry::{
    chart_convert, geodesic_distance, metric, reflect_across_geodesic, triangle_area, Bc, Chart, ChartPoint, Curvature,
    GeodesicTriangle,
};
use curvspec::killing::{killing_residual, KillingField};
use curvspec::mesh::{generate, refine};
use curvspec::theorems::{halton, mesh_size};
use proptest::prelude::*;
use std::f64::consts::PI;

fn kappa() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(-1.0), -1.3..1.3f64]
}

/// Klein point well inside the chart at every curvature above −4/3.
fn klein_point() -> impl Strategy<Value = ChartPoint> {
    (0.0..0.7f64, 0.0..2.0 * PI).prop_map(|(r, a)| ChartPoint::klein(r * a.cos(), r * a.sin()))
}

fn halfplane_point() -> impl Strategy<Value = ChartPoint> {
    (-2.0..2.0f64, 0.1..3.0f64).prop_map(|(x, y)| ChartPoint::halfplane(x, y))
}

fn triangle() -> impl Strategy<Value = GeodesicTriangle> {
    (-1.0..1.0f64, 0.0..2.0 * PI, 0.7..2.4f64, 0.7..2.4f64, 0.35..0.6f64).prop_filter_map(
        "degenerate",
        |(k, a0, d1, d2, r)| {
            if d1 + d2 > 2.0 * PI - 0.7 {
                return None;
            }
            let at = |a: f64| ChartPoint::klein(r * a.cos(), r * a.sin());
            let v = [at(a0), at(a0 + d1), at(a0 + d1 + d2)];
            let t = GeodesicTriangle::new(Curvature::new(k).ok()?, v, [Bc::Neumann; 3]).ok()?;
            t.angles.iter().all(|&a| a > 0.25).then_some(t)
        },
    )
}

/// Quality reachable near a small corner: the apex element, or an element
/// wedged between the concentric shells (radii 1 and 2) around the corner.
fn corner_bound(alpha: f64) -> f64 {
    let quality = |p: [[f64; 2]; 3]| {
        let l = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
        let s = [l(p[0], p[1]), l(p[1], p[2]), l(p[2], p[0])];
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0])).abs();
        area / (0.5 * s.iter().sum::<f64>()) / s.iter().cloned().fold(0.0, f64::max)
    };
    let q = [alpha.cos(), alpha.sin()];
    quality([[0.0, 0.0], [1.0, 0.0], q]).min(quality([[1.0, 0.0], [2.0, 0.0], q]))
}

fn close(a: &ChartPoint, b: &ChartPoint, tol: f64) -> bool {
    a.chart == b.chart && (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn klein_poincare_round_trip(k in kappa(), p in klein_point()) {
        let k = Curvature::new(k).unwrap();
        let q = chart_convert(p, Chart::PoincareDisk, k).unwrap();
        let back = chart_convert(q, Chart::Klein, k).unwrap();
        prop_assert!(close(&p, &back, 1e-12));
    }

    #[test]
    fn halfplane_round_trip(p in halfplane_point()) {
        let k = Curvature::new(-1.0).unwrap();
        for c in [Chart::Klein, Chart::PoincareDisk] {
            let q = chart_convert(p, c, k).unwrap();
            let back = chart_convert(q, Chart::HalfPlane, k).unwrap();
            prop_assert!(close(&p, &back, 1e-9 * (1.0 + p.x.abs() + p.y)));
        }
    }

    #[test]
    fn distance_is_a_metric(k in kappa(), p in klein_point(), q in klein_point(), r in klein_point()) {
        let k = Curvature::new(k).unwrap();
        let d = |a: &ChartPoint, b: &ChartPoint| geodesic_distance(k, a, b).unwrap();
        prop_assert!(d(&p, &p).abs() < 1e-12);
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-12);
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-10);
    }

    #[test]
    fn distance_is_chart_independent(k in kappa(), p in klein_point(), q in klein_point()) {
        let k = Curvature::new(k).unwrap();
        let d = geodesic_distance(k, &p, &q).unwrap();
        let to = |a: ChartPoint| chart_convert(a, Chart::PoincareDisk, k).unwrap();
        let e = geodesic_distance(k, &to(p), &to(q)).unwrap();
        prop_assert!((d - e).abs() < 1e-10);
    }

    #[test]
    fn reflections_are_isometries(k in kappa(), a in klein_point(), b in klein_point(), p in klein_point(), q in klein_point()) {
        prop_assume!((a.x - b.x).hypot(a.y - b.y) > 1e-3);
        let k = Curvature::new(k).unwrap();
        let rp = reflect_across_geodesic(k, [a, b], &p);
        let rq = reflect_across_geodesic(k, [a, b], &q);
        // reflected points may leave the chart domain
        if let (Ok(rp), Ok(rq)) = (rp, rq) {
            let d = geodesic_distance(k, &p, &q).unwrap();
            let e = geodesic_distance(k, &rp, &rq).unwrap();
            prop_assert!((d - e).abs() < 1e-9 * (1.0 + d));
        }
    }

    #[test]
    fn metric_is_positive_definite(k in kappa(), p in klein_point()) {
        let k = Curvature::new(k).unwrap();
        prop_assert!(metric(k, &p).unwrap().is_positive_definite());
        let q = chart_convert(p, Chart::PoincareDisk, k).unwrap();
        prop_assert!(metric(k, &q).unwrap().is_positive_definite());
    }

    #[test]
    fn conformal_charts_preserve_angles(k in kappa(), p in klein_point(), u in (-1.0..1.0f64, -1.0..1.0f64), v in (-1.0..1.0f64, -1.0..1.0f64)) {
        let (u, v) = ([u.0, u.1], [v.0, v.1]);
        prop_assume!(u[0].hypot(u[1]) > 1e-3 && v[0].hypot(v[1]) > 1e-3);
        let k = Curvature::new(k).unwrap();
        let q = chart_convert(p, Chart::PoincareDisk, k).unwrap();
        let g = metric(k, &q).unwrap();
        let euclid = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
        prop_assert!((g.angle(u, v) - euclid).abs() < 1e-12);
    }

    #[test]
    fn killing_fields_have_small_residual(k in kappa(), a in klein_point(), b in klein_point(), c in klein_point(), p in klein_point()) {
        prop_assume!((a.x - b.x).hypot(a.y - b.y) > 0.05);
        let k = Curvature::new(k).unwrap();
        let along = KillingField::along(k, [a, b], 1).unwrap();
        let rot = KillingField::elliptic(k, c, 1).unwrap();
        for x in [along, rot] {
            // truncation error is O(h²) and grows toward the chart boundary
            prop_assert!(killing_residual(&x, &p, 1e-5).unwrap() < 1e-6);
        }
    }

    #[test]
    fn rotation_about_a_point_of_a_geodesic_is_orthogonal_along_it(k in kappa(), a in klein_point(), b in klein_point(), s in 0.05..0.95f64) {
        prop_assume!((a.x - b.x).hypot(a.y - b.y) > 0.1);
        let k = Curvature::new(k).unwrap();
        let on = |s: f64| ChartPoint::klein(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y));
        let x = KillingField::elliptic(k, on(s), 1).unwrap();
        for j in 0..=8 {
            let t = j as f64 / 8.0;
            if (t - s).abs() < 0.02 {
                continue;
            }
            let ang = x.angle_with_geodesic([a, b], &on(t)).unwrap();
            prop_assert!((ang - PI / 2.0).abs() < 1e-8, "angle {ang} at {t}");
        }
    }

    #[test]
    fn halton_stays_in_unit_interval(i in 0u64..1_000_000, base in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let h = halton(i, base);
        prop_assert!((0.0..1.0).contains(&h));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mesh_and_matrices(t in triangle()) {
        let h = mesh_size(&t, 0.12).unwrap();
        let m = generate(&t, h, 1.0).unwrap();
        m.validate().unwrap();
        let smallest = t.angles.iter().cloned().fold(f64::INFINITY, f64::min);
        let bound = if smallest >= PI / 6.0 { 0.15 } else { 0.8 * corner_bound(smallest) };
        prop_assert!(m.min_quality() >= bound, "quality {} below {bound}", m.min_quality());
        let again = generate(&t, h, 1.0).unwrap();
        prop_assert_eq!(&m.nodes, &again.nodes);
        prop_assert_eq!(&m.elements, &again.elements);

        let p = assemble_mesh(&m).unwrap();
        prop_assert!(p.stiffness.max_asymmetry() < 1e-12);
        prop_assert!(p.mass.max_asymmetry() < 1e-12);
        let diag = p.stiffness.diag().into_iter().fold(0.0, f64::max);
        for s in p.stiffness.row_sums() {
            prop_assert!(s.abs() <= 1e-10 * diag);
        }
        let exact = triangle_area(&t).unwrap();
        prop_assert!((p.metric_area() - exact).abs() < 0.02 * exact);

        let f = refine(&m).unwrap();
        prop_assert_eq!(f.elements.len(), 4 * m.elements.len());
        f.validate().unwrap();
        let finer = assemble_mesh(&f).unwrap().metric_area();
        prop_assert!((finer - exact).abs() <= (p.metric_area() - exact).abs() + 1e-12 * exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn neumann_spectrum_structure(t in triangle()) {
        let m = generate(&t, mesh_size(&t, 0.1).unwrap(), 1.0).unwrap();
        let p = assemble_mesh(&m).unwrap();
        let s = solve_smallest(&p, 4, 1e-10).unwrap();
        let v = s.values();
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(v[0].abs() <= 1e-8 * v[1]);
        for a in &s.pairs {
            prop_assert!(a.residual <= 1e-10 * (1.0 + a.value));
            for b in &s.pairs {
                let mv = p.mass.matvec(&b.vector);
                let ip: f64 = a.vector.iter().zip(&mv).map(|(x, y)| x * y).sum();
                let delta = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                prop_assert!((ip - delta).abs() <= 1e-8, "{ip}");
            }
        }
        let u2 = &s.pairs[1];
        prop_assert_eq!(nodal_domains(&u2.vector, &m), 2);
        let nodal = extract_nodal_set(u2, &m);
        prop_assert!(!nodal.segments.is_empty());
        prop_assert!(nodal.segments.iter().all(|&n| n >= 2));
    }
}
