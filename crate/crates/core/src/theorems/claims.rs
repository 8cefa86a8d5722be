//! Structural claims about second Neumann and first mixed eigenfunctions.

use super::{artifact, solve_ladder, ClaimId, ClaimResult, Level, LevelOutcome, Settings, VerificationCase};
use crate::analysis::{
    certify_monotone, detect_critical_points, extract_nodal_set, killing_derivative_with,
    recover_gradient, vertex_coefficients, CriticalReport, Locator,
};
use crate::fem::{eigen_gap, EigenPair};
use crate::geometry::{
    classify_triangle, distance_to_geodesic, equidistant_point, geodesic_distance,
    triangle_angles_and_sides, Bc, Chart, ChartPoint, GeodesicTriangle, TriangleClass, ANGLE_TOL,
};
use crate::killing::{perpendicular_foot, KillingField};
use crate::mesh::TriangleMesh;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

const GAP_MIN: f64 = 0.01;
const LATITUDE_TOL: f64 = 1e-3;

type Check<'a> = dyn Fn(&Level, &EigenPair, &CriticalReport) -> Result<(bool, f64, Option<String>)> + 'a;

/// Evaluate `check` on every level and decide.
fn evaluate(
    claim: ClaimId,
    tolerance: f64,
    levels: &[Level],
    principal: usize,
    reports: &[CriticalReport],
    check: &Check<'_>,
) -> ClaimResult {
    let mut out = Vec::with_capacity(levels.len());
    for (l, r) in levels.iter().zip(reports) {
        let u = &l.spectrum.pairs[principal];
        match check(l, u, r) {
            Ok((passed, margin, detail)) => out.push(LevelOutcome {
                level: l.mesh.level,
                h: l.mesh.h,
                passed,
                margin,
                detail,
            }),
            Err(e) => return ClaimResult::inconclusive(claim, tolerance, e.to_string()),
        }
    }
    ClaimResult::decide(claim, tolerance, out)
}

/// Solve and detect critical points on every level; on failure every
/// listed claim is inconclusive.
fn prepare(
    case: &mut VerificationCase,
    t: &GeodesicTriangle,
    s: &Settings,
    k: usize,
    principal: usize,
    claims: &[ClaimId],
) -> Option<(Vec<Level>, Vec<CriticalReport>)> {
    let run = || -> Result<(Vec<Level>, Vec<CriticalReport>)> {
        let levels = solve_ladder(t, s, k)?;
        let reports = levels
            .iter()
            .map(|l| detect_critical_points(&l.spectrum.pairs[principal], &l.mesh, Some(s.crit_tol_rel)))
            .collect::<Result<Vec<_>>>()?;
        Ok((levels, reports))
    };
    match run() {
        Ok((levels, reports)) => {
            case.artifacts = levels.iter().zip(&reports).map(|(l, r)| artifact(l, Some(r.counts))).collect();
            Some((levels, reports))
        }
        Err(e) => {
            case.claims = claims.iter().map(|&c| ClaimResult::inconclusive(c, 0.0, e.to_string())).collect();
            None
        }
    }
}

fn no_critical_points(_: &Level, _: &EigenPair, r: &CriticalReport) -> Result<(bool, f64, Option<String>)> {
    let n = r.total() + r.counts.continua;
    Ok((n == 0, 0.0 - n as f64, (n > 0).then(|| format!("{:?}", r.counts))))
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Best Killing certificate among `axes`: the largest normalized slack
/// `min(σ·Xu)/max|Xu|` over axes and signs, and whether any axis certifies.
fn killing_check(
    m: &TriangleMesh,
    u: &EigenPair,
    axes: &[(String, [ChartPoint; 2])],
    margin: f64,
) -> Result<(bool, f64, Option<String>)> {
    let grad = recover_gradient(u, m)?;
    let mut best = (false, f64::NEG_INFINITY, None);
    for (name, axis) in axes {
        let x = KillingField::along(m.kappa, *axis, 1)?;
        let d = killing_derivative_with(&grad, &x, m)?;
        if d.max_abs == 0.0 {
            continue;
        }
        let cert = certify_monotone(&d, margin);
        let (slack, sign) = if d.interior_min / d.max_abs >= -d.interior_max / d.max_abs {
            (d.interior_min / d.max_abs, 1)
        } else {
            (-d.interior_max / d.max_abs, -1)
        };
        let better = (cert.is_monotone(), slack) > (best.0, best.1);
        if better {
            best = (cert.is_monotone(), slack, Some(format!("{name}, orientation {sign}")));
        }
        if cert.is_monotone() {
            break;
        }
    }
    Ok(best)
}

/// Edge axes, longest edge first.
fn edge_axes(t: &GeodesicTriangle) -> Result<Vec<(String, [ChartPoint; 2])>> {
    let sides = triangle_angles_and_sides(t)?.sides;
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| sides[b].total_cmp(&sides[a]).then(a.cmp(&b)));
    Ok(order
        .iter()
        .map(|&e| {
            let (a, b) = GeodesicTriangle::edge_vertices(e);
            (format!("edge {e} axis"), [t.vertices[a], t.vertices[b]])
        })
        .collect())
}

/// Best Killing-field certificate found for an eigenfunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingSummary {
    pub certified: bool,
    /// smallest oriented interior derivative relative to its largest magnitude
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

/// Try the loxodromic fields (translations when flat) along the
/// perpendicular from the odd vertex of a mixed triangle and along each
/// edge, and report the best.
pub fn killing_summary(m: &TriangleMesh, u: &EigenPair, margin: f64) -> Result<KillingSummary> {
    let t = &m.triangle;
    let nd = t.dirichlet_count();
    let odd = match nd {
        1 => t.edge_bc.iter().position(|&b| b == Bc::Dirichlet),
        2 => t.edge_bc.iter().position(|&b| b == Bc::Neumann),
        _ => None,
    };
    let mut axes = Vec::new();
    if let Some(v) = odd {
        if let Ok(f) = perpendicular_through(t, v) {
            axes.push((format!("perpendicular from vertex {v} to edge {v}"), [t.vertices[v], f]));
        }
    }
    axes.extend(edge_axes(t)?);
    let (certified, slack, field) = killing_check(m, u, &axes, margin)?;
    Ok(KillingSummary { certified, slack, field })
}

fn is_acute(t: &GeodesicTriangle, v: usize) -> bool {
    t.angles[v] < FRAC_PI_2 - ANGLE_TOL
}

/// Margin by which the maximum of `u` at admissible vertices exceeds `u`
/// everywhere else, relative to the sup norm.
fn vertex_extremum_margin(m: &TriangleMesh, u: &[f64], admissible: &[usize]) -> f64 {
    let nodes: Vec<usize> = admissible.iter().map(|&v| m.vertex_nodes[v]).collect();
    let best = nodes.iter().map(|&i| u[i]).fold(f64::NEG_INFINITY, f64::max);
    let other = (0..u.len()).filter(|i| !nodes.contains(i)).map(|i| u[i]).fold(f64::NEG_INFINITY, f64::max);
    (best - other) / sup_norm(u).max(f64::MIN_POSITIVE)
}

/// Hot-spots claims for a second Neumann eigenfunction. Asserted for κ < 0
/// and non-acute triangles; other triangles are probes.
pub fn verify_hotspots_neumann(t: &GeodesicTriangle, s: &Settings) -> VerificationCase {
    let t = t.with_bc([Bc::Neumann; 3]);
    let class = classify_triangle(&t);
    let mut case = VerificationCase::new(&t, "neumann_hotspots");
    if !(t.kappa.value() < 0.0 && class != TriangleClass::Acute) {
        case = case.probe(format!("curvature {} with {class:?} triangle", t.kappa.value()));
    }
    let ids = [
        ClaimId::NoCriticalPoints,
        ClaimId::ExtremaAtAcuteVertices,
        ClaimId::KillingCertificate,
        ClaimId::NodalSimpleArc,
        ClaimId::SimpleEigenvalue,
    ];
    let Some((levels, reports)) = prepare(&mut case, &t, s, s.solver.k.max(3), 1, &ids) else {
        return case;
    };
    let axes = match edge_axes(&t) {
        Ok(a) => a,
        Err(e) => {
            case.claims = ids.iter().map(|&c| ClaimResult::inconclusive(c, 0.0, e.to_string())).collect();
            return case;
        }
    };
    let acute: Vec<usize> = (0..3).filter(|&v| is_acute(&t, v)).collect();
    let extrema = |l: &Level, u: &EigenPair, _: &CriticalReport| -> Result<(bool, f64, Option<String>)> {
        let neg: Vec<f64> = u.vector.iter().map(|x| -x).collect();
        let margin = vertex_extremum_margin(&l.mesh, &u.vector, &acute).min(vertex_extremum_margin(&l.mesh, &neg, &acute));
        // the vertex value is the leading expansion coefficient; flag a sign clash when the fit is sharp
        let mut clash = None;
        for &v in &acute {
            if let Ok(x) = vertex_coefficients(u, &l.mesh, v) {
                let a0 = x.coefficients[0];
                let uv = u.vector[l.mesh.vertex_nodes[v]];
                if x.uncertainty[0] < 0.1 * a0.abs() && uv.abs() > 0.1 * sup_norm(&u.vector) && a0 * uv < 0.0 {
                    clash = Some(format!("vertex {v}: a0 = {a0:e}, u = {uv:e}"));
                }
            }
        }
        Ok((margin > 0.0 && clash.is_none(), margin, clash))
    };
    let killing = |l: &Level, u: &EigenPair, _: &CriticalReport| killing_check(&l.mesh, u, &axes, s.margin);
    let nodal = |l: &Level, u: &EigenPair, _: &CriticalReport| -> Result<(bool, f64, Option<String>)> {
        let z = extract_nodal_set(u, &l.mesh);
        let ok = z.ends_on_distinct_edges();
        Ok((ok, if ok { 1.0 } else { -1.0 }, (!ok).then(|| format!("{:?}", z.topology))))
    };
    let gap = |l: &Level, _: &EigenPair, _: &CriticalReport| -> Result<(bool, f64, Option<String>)> {
        let g = eigen_gap(&l.spectrum)?;
        Ok((g > GAP_MIN, g - GAP_MIN, None))
    };
    case.claims = vec![
        evaluate(ClaimId::NoCriticalPoints, s.crit_tol_rel, &levels, 1, &reports, &no_critical_points),
        evaluate(ClaimId::ExtremaAtAcuteVertices, 0.0, &levels, 1, &reports, &extrema),
        evaluate(ClaimId::KillingCertificate, s.margin, &levels, 1, &reports, &killing),
        evaluate(ClaimId::NodalSimpleArc, 0.0, &levels, 1, &reports, &nodal),
        evaluate(ClaimId::SimpleEigenvalue, GAP_MIN, &levels, 1, &reports, &gap),
    ];
    case
}

/// Claims for the first mixed eigenfunction with one or two Dirichlet
/// edges, gated on the vertex-angle hypotheses.
pub fn verify_mixed(t: &GeodesicTriangle, s: &Settings) -> VerificationCase {
    let nd = t.dirichlet_count();
    let mut case = VerificationCase::new(t, if nd == 2 { "mixed_double" } else { "mixed_single" });
    let right_or_less = |v: usize| t.angles[v] <= FRAC_PI_2 + ANGLE_TOL;
    let single = nd == 1;
    // Neumann vertex (single) or Dirichlet vertex (double): opposite the odd edge
    let odd = match nd {
        1 => t.edge_bc.iter().position(|&b| b == Bc::Dirichlet),
        2 => t.edge_bc.iter().position(|&b| b == Bc::Neumann),
        _ => None,
    };
    let Some(odd) = odd else {
        case = case.probe(format!("{nd} Dirichlet edges"));
        return case;
    };
    let (a, b) = GeodesicTriangle::edge_vertices(odd);
    let gate = if single { right_or_less(odd) } else { right_or_less(a) && right_or_less(b) };
    if !gate {
        case = case.probe("vertex angle hypothesis not met");
    }
    let ids: Vec<ClaimId> = if single {
        vec![ClaimId::NoCriticalPoints, ClaimId::NeumannVertexMax, ClaimId::KillingCertificate]
    } else {
        vec![ClaimId::SingleNeumannEdgeCritical, ClaimId::CriticalPointLocation, ClaimId::KillingCertificate]
    };
    let Some((levels, reports)) = prepare(&mut case, t, s, s.solver.k.max(2), 0, &ids) else {
        return case;
    };
    let odd_edge = [t.vertices[a], t.vertices[b]];
    let foot = perpendicular_through(t, odd).ok();
    let mut axes = Vec::new();
    if let Some(f) = foot {
        axes.push((format!("perpendicular from vertex {odd} to edge {odd}"), [t.vertices[odd], f]));
    }
    if let Ok(e) = edge_axes(t) {
        axes.extend(e);
    }
    let killing = |l: &Level, u: &EigenPair, _: &CriticalReport| killing_check(&l.mesh, u, &axes, s.margin);
    if single {
        let vmax = |l: &Level, u: &EigenPair, _: &CriticalReport| -> Result<(bool, f64, Option<String>)> {
            let m = vertex_extremum_margin(&l.mesh, &u.vector, &[odd]);
            Ok((m > 0.0, m, None))
        };
        case.claims = vec![
            evaluate(ClaimId::NoCriticalPoints, s.crit_tol_rel, &levels, 0, &reports, &no_critical_points),
            evaluate(ClaimId::NeumannVertexMax, 0.0, &levels, 0, &reports, &vmax),
            evaluate(ClaimId::KillingCertificate, s.margin, &levels, 0, &reports, &killing),
        ];
        return case;
    }
    let one = |_: &Level, _: &EigenPair, r: &CriticalReport| -> Result<(bool, f64, Option<String>)> {
        let on = r.edge_points.iter().filter(|p| p.edge == odd).count();
        let ok = r.counts.interior == 0 && r.counts.continua == 0 && r.counts.edge == 1 && on == 1;
        let off = r.counts.interior + r.counts.continua + r.counts.edge - on;
        Ok((ok, 0.0 - ((on as f64 - 1.0).abs() + off as f64), (!ok).then(|| format!("{:?}", r.counts))))
    };
    // by reflection symmetry the critical point of an isosceles triangle is the midpoint of its base
    let symmetric = (t.angles[a] - t.angles[b]).abs() < 1e-9;
    let foot = geodesic_distance(t.kappa, &odd_edge[0], &odd_edge[1])
        .and_then(|len| equidistant_point(t.kappa, odd_edge, 0.5 * len, 0.0, Chart::PoincareDisk))
        .ok();
    let location = |l: &Level, _: &EigenPair, r: &CriticalReport| -> Result<(bool, f64, Option<String>)> {
        let f = foot.ok_or(Error::DegenerateGeodesic)?;
        let h = l.mesh.h;
        let Some(p) = r.edge_points.iter().find(|p| p.edge == odd) else {
            return Ok((false, -h, Some("no critical point on the Neumann edge".into())));
        };
        let d = (p.location[0] - f.x).hypot(p.location[1] - f.y);
        Ok((d <= h, h - d, Some(format!("at {:?}, expected [{}, {}]", p.location, f.x, f.y))))
    };
    case.claims = vec![evaluate(ClaimId::SingleNeumannEdgeCritical, s.crit_tol_rel, &levels, 0, &reports, &one)];
    if symmetric {
        case.claims.push(evaluate(ClaimId::CriticalPointLocation, 0.0, &levels, 0, &reports, &location));
    }
    case.claims.push(evaluate(ClaimId::KillingCertificate, s.margin, &levels, 0, &reports, &killing));
    case
}

/// Point on the geodesic of edge `v` such that the geodesic from vertex `v`
/// through it is perpendicular to that edge. When the vertex is a pole of
/// the edge every such geodesic is perpendicular and the edge midpoint is
/// used.
fn perpendicular_through(t: &GeodesicTriangle, v: usize) -> Result<ChartPoint> {
    let (a, b) = GeodesicTriangle::edge_vertices(v);
    let edge = [t.vertices[a], t.vertices[b]];
    let k = t.kappa.value();
    let d = distance_to_geodesic(t.kappa, edge, &t.vertices[v])?.abs();
    if k > 0.0 && (d - FRAC_PI_2 / k.sqrt()).abs() < 1e-9 {
        let len = geodesic_distance(t.kappa, &edge[0], &edge[1])?;
        return equidistant_point(t.kappa, edge, 0.5 * len, 0.0, t.chart());
    }
    perpendicular_foot(t.kappa, edge, &t.vertices[v])
}

/// Base edge of a κ > 0 triangle with exactly two right angles.
fn exception_base(t: &GeodesicTriangle) -> Option<usize> {
    let right: Vec<usize> = (0..3).filter(|&v| (t.angles[v] - FRAC_PI_2).abs() < 1e-9).collect();
    (t.kappa.value() > 0.0 && right.len() == 2).then(|| 3 - right[0] - right[1])
}

/// Largest variation of `u` along curves equidistant from edge `base`,
/// relative to the sup norm.
fn latitude_variation(m: &TriangleMesh, u: &[f64], base: usize) -> Result<f64> {
    let t = &m.triangle;
    let (a, b) = GeodesicTriangle::edge_vertices(base);
    let g = [t.vertices[a], t.vertices[b]];
    let apex = distance_to_geodesic(t.kappa, g, &t.vertices[base])?;
    let len = geodesic_distance(t.kappa, &g[0], &g[1])?;
    let loc = Locator::new(m);
    let mut worst = 0.0f64;
    for j in 1..=6 {
        let d = apex * j as f64 / 8.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..40 {
            let s = len * (k as f64 + 0.5) / 40.0;
            let p = equidistant_point(t.kappa, g, s, d, Chart::PoincareDisk)?;
            if let Some(v) = loc.interpolate(u, [p.x, p.y]) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if hi >= lo {
            worst = worst.max(hi - lo);
        }
    }
    Ok(worst / sup_norm(u).max(f64::MIN_POSITIVE))
}

/// Finiteness of the critical set: no continuum for κ ≠ 0, except on the
/// base of a spherical triangle with two right angles, where the second
/// eigenfunction depends on the distance to the base only.
pub fn verify_finiteness(t: &GeodesicTriangle, s: &Settings) -> VerificationCase {
    let t = t.with_bc([Bc::Neumann; 3]);
    let base = exception_base(&t);
    let mut case = VerificationCase::new(&t, if base.is_some() { "finiteness_exception" } else { "finiteness" });
    if t.kappa.is_flat() {
        case = case.probe("flat triangle");
    }
    let ids: Vec<ClaimId> = match base {
        Some(_) => vec![ClaimId::ContinuumOnBase, ClaimId::LatitudeConstancy],
        None => vec![ClaimId::NoContinuum],
    };
    // the spherical demo triangles need half the suite size to resolve the
    // 1e-3 constancy tolerance on the coarse level
    let fine;
    let s = if t.kappa.value() > 0.0 {
        fine = Settings { h_rel: 0.5 * s.h_rel, ..s.clone() };
        &fine
    } else {
        s
    };
    let Some((levels, reports)) = prepare(&mut case, &t, s, s.solver.k.max(3), 1, &ids) else {
        return case;
    };
    match base {
        Some(e) => {
            let on_base = |_: &Level, _: &EigenPair, r: &CriticalReport| -> Result<(bool, f64, Option<String>)> {
                let ok = r.has_continuum_on(e);
                Ok((ok, if ok { 1.0 } else { -1.0 }, Some(format!("{:?}", r.counts))))
            };
            let latitude = |l: &Level, u: &EigenPair, _: &CriticalReport| -> Result<(bool, f64, Option<String>)> {
                let v = latitude_variation(&l.mesh, &u.vector, e)?;
                Ok((v < LATITUDE_TOL, LATITUDE_TOL - v, None))
            };
            case.claims = vec![
                evaluate(ClaimId::ContinuumOnBase, s.crit_tol_rel, &levels, 1, &reports, &on_base).on_edge(e),
                evaluate(ClaimId::LatitudeConstancy, LATITUDE_TOL, &levels, 1, &reports, &latitude).on_edge(e),
            ];
        }
        None => {
            let none = |_: &Level, _: &EigenPair, r: &CriticalReport| -> Result<(bool, f64, Option<String>)> {
                let n = r.counts.continua;
                Ok((n == 0, 0.0 - n as f64, Some(format!("{:?}", r.counts))))
            };
            case.claims = vec![evaluate(ClaimId::NoContinuum, s.crit_tol_rel, &levels, 1, &reports, &none)];
        }
    }
    case
}
