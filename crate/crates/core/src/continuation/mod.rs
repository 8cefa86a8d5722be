//! Curvature sweeps over a triangle whose vertices are fixed in the Klein
//! chart. One mesh is generated and its Klein node set re-mapped to the
//! Poincaré chart at every curvature on the path; eigenvalue branches are
//! followed by eigenvector overlap rather than by value order.

use crate::analysis::{detect_critical_points, CriticalReport};
use crate::fem::{assemble_mesh, solve_with, Csr, SolverOptions, Spectrum};
use crate::geometry::{chart_convert, classify_triangle, Bc, Chart, ChartPoint, Curvature, GeodesicTriangle, TriangleClass, ANGLE_TOL};
use crate::mesh::{generate, TriangleMesh};
use crate::theorems::mesh_size;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Largest branch count matched by exhaustive search.
const MAX_BRANCHES: usize = 8;
/// Critical points of consecutive steps closer than this many `h` are the same point.
const MATCH_RADIUS: f64 = 5.0;

/// Klein-chart triangle and the curvature interval `κ(t) = κ₀ + t(κ₁ − κ₀)`, `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvaturePath {
    pub vertices: [[f64; 2]; 3],
    #[serde(default = "all_neumann")]
    pub bc: [Bc; 3],
    pub kappa_start: f64,
    pub kappa_end: f64,
}

fn all_neumann() -> [Bc; 3] {
    [Bc::Neumann; 3]
}

impl CurvaturePath {
    pub fn kappa_at(&self, t: f64) -> f64 {
        self.kappa_start + t * (self.kappa_end - self.kappa_start)
    }

    pub fn triangle_at(&self, t: f64) -> Result<GeodesicTriangle> {
        let k = Curvature::new(self.kappa_at(t))?;
        GeodesicTriangle::new(k, self.vertices.map(|[x, y]| ChartPoint::klein(x, y)), self.bc)
    }

    /// The curvature the shared mesh is generated at: the endpoint of smaller
    /// `|κ|`, so a path and its reverse use the same mesh.
    fn mesh_kappa(&self) -> f64 {
        let (a, b) = (self.kappa_start, self.kappa_end);
        if a.abs() < b.abs() || (a.abs() == b.abs() && a >= b) {
            a
        } else {
            b
        }
    }

    pub fn reversed(&self) -> Self {
        CurvaturePath {
            kappa_start: self.kappa_end,
            kappa_end: self.kappa_start,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    /// number of branches followed
    pub k: usize,
    /// uniform steps in `t` before bisection
    pub steps: usize,
    /// absolute mesh size; `h_rel` times the longest side when absent
    pub h: Option<f64>,
    pub h_rel: f64,
    pub grading: f64,
    pub solver: SolverOptions,
    pub crit_tol_rel: f64,
    /// matched overlaps below this trigger bisection
    pub min_overlap: f64,
    /// smallest step in `t`
    pub min_step: f64,
    /// branch whose critical points are tracked; the principal branch when absent
    pub tracked: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            k: 4,
            steps: 20,
            h: None,
            h_rel: 0.05,
            grading: 2.0,
            solver: SolverOptions::default(),
            crit_tol_rel: 1e-3,
            min_overlap: 0.9,
            min_step: 1e-4,
            tracked: None,
        }
    }
}

/// One accepted point of the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub t: f64,
    pub kappa: f64,
    /// eigenvalues in ascending order
    pub values: Vec<f64>,
    /// `branch[b]` is the index into `values` carried by branch `b`
    pub branch: Vec<usize>,
    /// overlap of each branch with its previous-step vector; 1 at the first step
    pub overlap: Vec<f64>,
    /// `|⟨v_prev_i, v_j⟩_M|` for sorted indices `i` (previous) and `j` (this step)
    pub overlap_matrix: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<CriticalReport>,
}

impl SweepStep {
    pub fn branch_value(&self, b: usize) -> f64 {
        self.values[self.branch[b]]
    }

    pub fn crit_count(&self) -> Option<usize> {
        self.critical.as_ref().map(|r| r.total() + r.counts.continua)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// two branches exchanged their order
    Crossing { branches: [usize; 2] },
    /// a matched overlap stayed below the threshold at the minimum step
    OverlapDip { branch: usize, overlap: f64 },
    /// the tracked branch's critical count changed
    CriticalCount { from: usize, to: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEvent {
    pub t: f64,
    pub kappa: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchData {
    pub path: CurvaturePath,
    pub options: SweepOptions,
    pub tracked: usize,
    pub n_nodes: usize,
    pub h: f64,
    pub steps: Vec<SweepStep>,
}

impl BranchData {
    pub fn t(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.t).collect()
    }

    pub fn kappa(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.kappa).collect()
    }

    /// Values of branch `b` along the path.
    pub fn branch(&self, b: usize) -> Vec<f64> {
        self.steps.iter().map(|s| s.branch_value(b)).collect()
    }

    /// CSV with columns `t,kappa,branch,value,overlap,crit_count`; the
    /// critical count refers to the tracked branch and is empty for others.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,kappa,branch,value,overlap,crit_count\n");
        for st in &self.steps {
            for b in 0..st.branch.len() {
                let crit = match (b == self.tracked, st.crit_count()) {
                    (true, Some(c)) => c.to_string(),
                    _ => String::new(),
                };
                s.push_str(&format!(
                    "{:.16e},{:.16e},{b},{:.16e},{:.16e},{crit}\n",
                    st.t,
                    st.kappa,
                    st.branch_value(b),
                    st.overlap[b]
                ));
            }
        }
        s
    }

    /// Order swaps between branches, overlap dips and changes of the tracked
    /// critical count, in path order.
    pub fn events(&self) -> Vec<SweepEvent> {
        let mut out = Vec::new();
        for w in self.steps.windows(2) {
            let (p, c) = (&w[0], &w[1]);
            let ev = |kind| SweepEvent { t: c.t, kappa: c.kappa, kind };
            let k = c.branch.len();
            for a in 0..k {
                for b in a + 1..k {
                    let before = p.branch[a] < p.branch[b];
                    let after = c.branch[a] < c.branch[b];
                    if before != after {
                        out.push(ev(EventKind::Crossing { branches: [a, b] }));
                    }
                }
            }
            for (b, &o) in c.overlap.iter().enumerate() {
                if o < self.options.min_overlap {
                    out.push(ev(EventKind::OverlapDip { branch: b, overlap: o }));
                }
            }
            if let (Some(from), Some(to)) = (p.crit_count(), c.crit_count()) {
                if from != to {
                    out.push(ev(EventKind::CriticalCount { from, to }));
                }
            }
        }
        out
    }

    /// Crossing events involving branch `b`.
    pub fn crossings_of(&self, b: usize) -> usize {
        self.events()
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Crossing { branches } if branches.contains(&b)))
            .count()
    }

    /// Largest `|Δvalue| / Δt` of branch `b` between consecutive steps.
    pub fn max_slope(&self, b: usize) -> f64 {
        self.steps
            .windows(2)
            .map(|w| (w[1].branch_value(b) - w[0].branch_value(b)).abs() / (w[1].t - w[0].t).abs())
            .fold(0.0, f64::max)
    }
}

struct Solved {
    spectrum: Spectrum,
    mass: Csr,
    mesh: TriangleMesh,
}

fn solve_at(base: &TriangleMesh, path: &CurvaturePath, t: f64, o: &SweepOptions) -> Result<Solved> {
    let fail = |e: Error| Error::StepFailure {
        t,
        reason: e.to_string(),
    };
    let kappa = Curvature::new(path.kappa_at(t)).map_err(fail)?;
    let mesh = base.with_curvature(kappa).map_err(fail)?;
    let p = assemble_mesh(&mesh).map_err(fail)?;
    let opts = SolverOptions { k: o.k, ..o.solver };
    let spectrum = solve_with(&p, &opts).map_err(fail)?;
    if spectrum.pairs.len() < o.k {
        return Err(fail(Error::InsufficientPairs {
            have: spectrum.pairs.len(),
            need: o.k,
        }));
    }
    Ok(Solved {
        spectrum,
        mass: p.mass,
        mesh,
    })
}

fn overlap_matrix(prev: &Spectrum, cur: &Spectrum, mass: &Csr) -> Vec<Vec<f64>> {
    let mv: Vec<Vec<f64>> = cur.pairs.iter().map(|q| mass.matvec(&q.vector)).collect();
    let norm_cur: Vec<f64> = cur.pairs.iter().zip(&mv).map(|(q, m)| crate::fem::sparse::dot(&q.vector, m).sqrt()).collect();
    prev.pairs
        .iter()
        .map(|p| {
            let np = mass.quad(&p.vector).sqrt();
            mv.iter()
                .zip(&norm_cur)
                .map(|(m, &nc)| (crate::fem::sparse::dot(&p.vector, m) / (np * nc)).abs())
                .collect()
        })
        .collect()
}

/// Assignment of previous-step branches to current sorted indices that
/// maximizes the total overlap; ties go to the lexicographically first.
fn best_assignment(prev_branch: &[usize], o: &[Vec<f64>]) -> Vec<usize> {
    let k = prev_branch.len();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut cur = Vec::with_capacity(k);
    let mut used = vec![false; k];
    fn rec(
        b: usize,
        prev_branch: &[usize],
        o: &[Vec<f64>],
        cur: &mut Vec<usize>,
        used: &mut [bool],
        score: f64,
        best: &mut (f64, Vec<usize>),
    ) {
        if b == prev_branch.len() {
            if score > best.0 {
                *best = (score, cur.clone());
            }
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(b + 1, prev_branch, o, cur, used, score + o[prev_branch[b]][j], best);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(0, prev_branch, o, &mut cur, &mut used, 0.0, &mut best);
    best.1
}

fn default_tracked(bc: [Bc; 3]) -> usize {
    usize::from(bc.iter().all(|&b| b == Bc::Neumann))
}

fn check_options(path: &CurvaturePath, o: &SweepOptions) -> Result<()> {
    if o.k == 0 || o.k > MAX_BRANCHES {
        return Err(Error::Config(format!("branch count {} outside 1..={MAX_BRANCHES}", o.k)));
    }
    if o.steps == 0 {
        return Err(Error::Config("at least one step required".into()));
    }
    if !(o.min_step > 0.0 && o.min_step < 1.0) {
        return Err(Error::Config(format!("min_step {} outside (0, 1)", o.min_step)));
    }
    if let Some(b) = o.tracked {
        if b >= o.k {
            return Err(Error::Config(format!("tracked branch {b} not below k = {}", o.k)));
        }
    }
    Curvature::new(path.kappa_start)?;
    Curvature::new(path.kappa_end)?;
    Ok(())
}

/// Sweep the path. On a step failure the steps accepted so far are returned
/// with the error.
pub fn sweep_partial(path: &CurvaturePath, o: &SweepOptions) -> (Option<BranchData>, Option<Error>) {
    if let Err(e) = check_options(path, o) {
        return (None, Some(e));
    }
    let base = match path
        .triangle_at(0.0)
        .and_then(|_| {
            let k0 = Curvature::new(path.mesh_kappa())?;
            let t = GeodesicTriangle::new(k0, path.vertices.map(|[x, y]| ChartPoint::klein(x, y)), path.bc)?;
            let h = match o.h {
                Some(h) => h,
                None => mesh_size(&t, o.h_rel)?,
            };
            generate(&t, h, o.grading)
        }) {
        Ok(m) => m,
        Err(e) => return (None, Some(e)),
    };
    let tracked = o.tracked.unwrap_or_else(|| default_tracked(path.bc));
    let mut data = BranchData {
        path: path.clone(),
        options: o.clone(),
        tracked,
        n_nodes: base.n_nodes(),
        h: base.h,
        steps: Vec::new(),
    };
    let critical = |s: &Solved, sorted: usize| -> Result<CriticalReport> {
        detect_critical_points(&s.spectrum.pairs[sorted], &s.mesh, Some(o.crit_tol_rel))
    };
    let record = |s: &Solved, t: f64, branch: Vec<usize>, overlap: Vec<f64>, om: Vec<Vec<f64>>| -> Result<SweepStep> {
        let report = critical(s, branch[tracked]).map_err(|e| Error::StepFailure {
            t,
            reason: e.to_string(),
        })?;
        Ok(SweepStep {
            t,
            kappa: s.spectrum.kappa,
            values: s.spectrum.values(),
            branch,
            overlap,
            overlap_matrix: om,
            residuals: s.spectrum.pairs.iter().map(|p| p.residual).collect(),
            critical: Some(report),
        })
    };
    let mut prev = match solve_at(&base, path, 0.0, o) {
        Ok(s) => s,
        Err(e) => return (Some(data), Some(e)),
    };
    let identity: Vec<usize> = (0..o.k).collect();
    match record(&prev, 0.0, identity, vec![1.0; o.k], Vec::new()) {
        Ok(s) => data.steps.push(s),
        Err(e) => return (Some(data), Some(e)),
    }
    let n = o.steps;
    let mut i = 1;
    let mut target = 1.0 / n as f64;
    while i <= n {
        let t_prev = data.steps.last().expect("first step recorded").t;
        let cur = match solve_at(&base, path, target, o) {
            Ok(s) => s,
            Err(e) => return (Some(data), Some(e)),
        };
        let om = overlap_matrix(&prev.spectrum, &cur.spectrum, &cur.mass);
        let last = &data.steps.last().expect("first step recorded").branch;
        let assign = best_assignment(last, &om);
        let overlap: Vec<f64> = last.iter().zip(&assign).map(|(&p, &c)| om[p][c]).collect();
        let worst = overlap.iter().cloned().fold(f64::INFINITY, f64::min);
        let dt = target - t_prev;
        if worst < o.min_overlap && 0.5 * dt.abs() >= o.min_step {
            log::debug!("overlap {worst:.3} at t = {target}; bisecting");
            target = t_prev + 0.5 * dt;
            continue;
        }
        if worst < o.min_overlap {
            log::warn!("overlap {worst:.3} below {} at the minimum step, t = {target}", o.min_overlap);
        }
        match record(&cur, target, assign, overlap, om) {
            Ok(s) => data.steps.push(s),
            Err(e) => return (Some(data), Some(e)),
        }
        prev = cur;
        let grid = i as f64 / n as f64;
        if target == grid {
            i += 1;
        }
        target = i as f64 / n as f64;
    }
    (Some(data), None)
}

pub fn sweep(path: &CurvaturePath, o: &SweepOptions) -> Result<BranchData> {
    match sweep_partial(path, o) {
        (Some(d), None) => Ok(d),
        (_, Some(e)) => Err(e),
        (None, None) => unreachable!("sweep returns data or an error"),
    }
}

/// Critical points of the tracked branch at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceRow {
    pub t: f64,
    pub kappa: f64,
    pub count: usize,
    /// Klein-chart locations of isolated critical points
    pub points: Vec<[f64; 2]>,
    /// index of the nearest previous-step point within the match radius
    pub matched: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Persistence {
    pub rows: Vec<PersistenceRow>,
    pub events: Vec<SweepEvent>,
    /// whether the path meets the hypotheses under which the count is zero
    pub expects_zero: bool,
    /// `Some(true)` when the count is zero at every step of such a path
    pub zero_everywhere: Option<bool>,
}

/// Whether the triangle at every step satisfies the hypotheses under which
/// the tracked eigenfunction has no critical points: all Neumann and not
/// acute, or one Dirichlet edge whose opposite angle is at most `π/2`.
fn expects_zero(path: &CurvaturePath, b: &BranchData) -> bool {
    let nd = path.bc.iter().filter(|&&x| x == Bc::Dirichlet).count();
    let kappa_ok = path.kappa_start <= 0.0 && path.kappa_end <= 0.0;
    kappa_ok
        && b.steps.iter().all(|s| {
            let Ok(t) = path.triangle_at(s.t) else {
                return false;
            };
            match nd {
                0 => classify_triangle(&t) != TriangleClass::Acute,
                1 => {
                    let odd = path.bc.iter().position(|&x| x == Bc::Dirichlet).expect("one Dirichlet edge");
                    t.angles[odd] <= FRAC_PI_2 + ANGLE_TOL
                }
                _ => false,
            }
        })
}

/// Per-step critical counts and nearest-neighbour matching of the tracked
/// branch's isolated critical points across steps.
pub fn track_critical_points(b: &BranchData) -> Persistence {
    let mut rows: Vec<PersistenceRow> = Vec::with_capacity(b.steps.len());
    let radius = MATCH_RADIUS * b.h;
    for s in &b.steps {
        let Some(r) = &s.critical else { continue };
        let kappa = Curvature::new(s.kappa).expect("curvature validated by the sweep");
        let to_klein = |p: [f64; 2]| {
            chart_convert(ChartPoint::poincare(p[0], p[1]), Chart::Klein, kappa)
                .map(|q| [q.x, q.y])
                .unwrap_or(p)
        };
        let points: Vec<[f64; 2]> = r
            .interior_points
            .iter()
            .map(|p| to_klein(p.location))
            .chain(r.edge_points.iter().map(|p| to_klein(p.location)))
            .collect();
        let matched = match rows.last() {
            Some(prev) => points
                .iter()
                .map(|p| {
                    prev.points
                        .iter()
                        .enumerate()
                        .map(|(i, q)| (i, (p[0] - q[0]).hypot(p[1] - q[1])))
                        .filter(|&(_, d)| d <= radius)
                        .min_by(|x, y| x.1.total_cmp(&y.1))
                        .map(|(i, _)| i)
                })
                .collect(),
            None => vec![None; points.len()],
        };
        rows.push(PersistenceRow {
            t: s.t,
            kappa: s.kappa,
            count: r.total() + r.counts.continua,
            points,
            matched,
        });
    }
    let events = b
        .events()
        .into_iter()
        .filter(|e| matches!(e.kind, EventKind::CriticalCount { .. }))
        .collect();
    let expects = expects_zero(&b.path, b);
    Persistence {
        zero_everywhere: expects.then(|| rows.iter().all(|r| r.count == 0)),
        rows,
        events,
        expects_zero: expects,
    }
}

/// Comparison of a sweep with its step-halved rerun at the shared `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalvingCheck {
    /// largest `|Δvalue| / max(1, |value|)` over shared steps and branches
    pub max_rel_diff: f64,
    pub tolerance: f64,
    pub shared_steps: usize,
    /// largest slope of the tracked branch on the coarse and fine sweeps
    pub slope_coarse: f64,
    pub slope_fine: f64,
    pub consistent: bool,
}

/// Rerun with twice the steps and compare branch values where the grids
/// coincide; consistent when they agree within twice the solver tolerance.
pub fn step_halving(path: &CurvaturePath, o: &SweepOptions) -> Result<(BranchData, BranchData, HalvingCheck)> {
    let coarse = sweep(path, o)?;
    let fine_opts = SweepOptions {
        steps: 2 * o.steps,
        ..o.clone()
    };
    let fine = sweep(path, &fine_opts)?;
    let check = compare_sweeps(&coarse, &fine, 2.0 * o.solver.tol);
    Ok((coarse, fine, check))
}

/// Branch-by-branch comparison at equal `t`.
pub fn compare_sweeps(a: &BranchData, b: &BranchData, tolerance: f64) -> HalvingCheck {
    let mut worst = 0.0f64;
    let mut shared = 0;
    let mut j = 0;
    for s in &a.steps {
        while j < b.steps.len() && b.steps[j].t < s.t {
            j += 1;
        }
        let Some(f) = b.steps.get(j) else { break };
        if f.t != s.t {
            continue;
        }
        shared += 1;
        for br in 0..s.branch.len().min(f.branch.len()) {
            let (x, y) = (s.branch_value(br), f.branch_value(br));
            worst = worst.max((x - y).abs() / x.abs().max(1.0));
        }
    }
    HalvingCheck {
        max_rel_diff: worst,
        tolerance,
        shared_steps: shared,
        slope_coarse: a.max_slope(a.tracked),
        slope_fine: b.max_slope(b.tracked),
        consistent: shared > 0 && worst <= tolerance,
    }
}

#[cfg(test)]
mod tests;
