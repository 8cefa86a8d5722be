//! Verification suites: each structural claim about the eigenfunctions of a
//! triangle family is checked on two nested meshes and reported as pass,
//! fail or inconclusive.

mod bounds;
mod claims;
mod family;

pub use bounds::{
    mixed_inequality_case, one_quarter_case, sphere_margin_case, test_function_errors,
    test_function_size, TestFunctionLevel,
};
pub use claims::{killing_summary, verify_finiteness, verify_hotspots_neumann, verify_mixed, KillingSummary};
pub use family::{halton, hyperbolic_family, mixed_family, spherical_family, exception_triangle};

use crate::analysis::CriticalCounts;
use crate::fem::{assemble_mesh, eigen_gap, solve_with, SolverOptions, Spectrum};
use crate::geometry::{chart_convert, Chart, GeodesicTriangle, TriangleSpec};
use crate::mesh::{generate, refine, TriangleMesh};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    NoCriticalPoints,
    ExtremaAtAcuteVertices,
    KillingCertificate,
    NodalSimpleArc,
    SimpleEigenvalue,
    NeumannVertexMax,
    SingleNeumannEdgeCritical,
    CriticalPointLocation,
    NoContinuum,
    ContinuumOnBase,
    LatitudeConstancy,
    OneQuarter,
    MixedInequality,
    SphereMargin,
}

impl ClaimId {
    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::NoCriticalPoints => "no_critical_points",
            ClaimId::ExtremaAtAcuteVertices => "extrema_at_acute_vertices",
            ClaimId::KillingCertificate => "killing_certificate",
            ClaimId::NodalSimpleArc => "nodal_simple_arc",
            ClaimId::SimpleEigenvalue => "simple_eigenvalue",
            ClaimId::NeumannVertexMax => "neumann_vertex_max",
            ClaimId::SingleNeumannEdgeCritical => "single_neumann_edge_critical",
            ClaimId::CriticalPointLocation => "critical_point_location",
            ClaimId::NoContinuum => "no_continuum",
            ClaimId::ContinuumOnBase => "continuum_on_base",
            ClaimId::LatitudeConstancy => "latitude_constancy",
            ClaimId::OneQuarter => "one_quarter",
            ClaimId::MixedInequality => "mixed_inequality",
            ClaimId::SphereMargin => "sphere_margin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive { reason: String },
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Outcome of one claim on one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelOutcome {
    pub level: usize,
    pub h: f64,
    pub passed: bool,
    /// signed slack; positive when the claim holds
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim: ClaimId,
    /// edge the claim refers to, for per-edge claims
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<usize>,
    #[serde(flatten)]
    pub status: Status,
    /// margin at the finest level
    pub margin: f64,
    pub tolerance: f64,
    /// size and level of the finest mesh the claim was decided on
    pub h: f64,
    pub level: usize,
    pub levels: Vec<LevelOutcome>,
}

impl ClaimResult {
    /// Pass when every level passes, fail when every level fails,
    /// inconclusive otherwise.
    pub fn decide(claim: ClaimId, tolerance: f64, levels: Vec<LevelOutcome>) -> Self {
        let status = if levels.len() < 2 {
            Status::Inconclusive {
                reason: format!("decided on {} mesh level(s)", levels.len()),
            }
        } else if levels.iter().all(|l| l.passed) {
            Status::Pass
        } else if levels.iter().all(|l| !l.passed) {
            Status::Fail
        } else {
            Status::Inconclusive {
                reason: "mesh levels disagree".into(),
            }
        };
        let last = levels.last();
        ClaimResult {
            claim,
            edge: None,
            status,
            margin: last.map_or(f64::NAN, |l| l.margin),
            tolerance,
            h: last.map_or(f64::NAN, |l| l.h),
            level: last.map_or(0, |l| l.level),
            levels,
        }
    }

    pub fn inconclusive(claim: ClaimId, tolerance: f64, reason: String) -> Self {
        ClaimResult {
            claim,
            edge: None,
            status: Status::Inconclusive { reason },
            margin: f64::NAN,
            tolerance,
            h: f64::NAN,
            level: 0,
            levels: Vec::new(),
        }
    }

    pub fn on_edge(mut self, e: usize) -> Self {
        self.edge = Some(e);
        self
    }
}

/// Per-level data kept with a case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelArtifact {
    pub level: usize,
    pub h: f64,
    pub n_nodes: usize,
    pub values: Vec<f64>,
    /// relative gap above the principal eigenvalue
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<CriticalCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCase {
    pub id: usize,
    pub name: String,
    pub triangle: TriangleSpec,
    pub angles: [f64; 3],
    /// false when the triangle is outside the hypotheses of the claims
    pub asserted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<String>,
    pub claims: Vec<ClaimResult>,
    pub artifacts: Vec<LevelArtifact>,
}

impl VerificationCase {
    pub(crate) fn new(t: &GeodesicTriangle, name: &str) -> Self {
        VerificationCase {
            id: 0,
            name: name.into(),
            triangle: TriangleSpec::from(t),
            angles: t.angles,
            asserted: true,
            gate: None,
            claims: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub(crate) fn probe(mut self, why: impl Into<String>) -> Self {
        self.asserted = false;
        self.gate = Some(why.into());
        self
    }

    pub fn claim(&self, id: ClaimId) -> Option<&ClaimResult> {
        self.claims.iter().find(|c| c.claim == id)
    }

    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.status == Status::Pass)
    }
}

/// Mesh and solver settings shared by the cases of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    /// coarse mesh size as a fraction of the longest Poincaré-chart side
    pub h_rel: f64,
    pub grading: f64,
    /// number of nested meshes, at least two
    pub levels: usize,
    pub solver: SolverOptions,
    /// critical-point gradient tolerance relative to the largest gradient
    pub crit_tol_rel: f64,
    /// monotonicity margin for Killing certificates
    pub margin: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            h_rel: 0.05,
            grading: 2.0,
            levels: 2,
            solver: SolverOptions {
                k: 4,
                ..SolverOptions::default()
            },
            crit_tol_rel: 1e-3,
            margin: 1e-6,
        }
    }
}

/// Coarse mesh size for `t`: `h_rel` times the longest side in the
/// Poincaré chart, capped by a quarter of the shortest.
pub fn mesh_size(t: &GeodesicTriangle, h_rel: f64) -> Result<f64> {
    let mut p = [[0.0; 2]; 3];
    for (q, v) in p.iter_mut().zip(&t.vertices) {
        let c = chart_convert(*v, Chart::PoincareDisk, t.kappa)?;
        *q = [c.x, c.y];
    }
    let sides: Vec<f64> = (0..3)
        .map(|i| {
            let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .collect();
    let max = sides.iter().cloned().fold(0.0, f64::max);
    let min = sides.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((h_rel * max).min(0.25 * min))
}

/// One mesh of the ladder with its spectrum.
pub(crate) struct Level {
    pub mesh: TriangleMesh,
    pub spectrum: Spectrum,
}

/// Solve on the nested ladder of `t` (boundary conditions from `t`).
pub(crate) fn solve_ladder(t: &GeodesicTriangle, s: &Settings, k: usize) -> Result<Vec<Level>> {
    if s.levels < 1 {
        return Err(Error::Config("at least one mesh level required".into()));
    }
    let h = mesh_size(t, s.h_rel)?;
    let mut mesh = generate(t, h, s.grading)?;
    let opts = SolverOptions { k, ..s.solver };
    let mut out = Vec::with_capacity(s.levels);
    for l in 0..s.levels {
        if l > 0 {
            mesh = refine(&mesh)?;
        }
        let p = assemble_mesh(&mesh)?;
        let spectrum = solve_with(&p, &opts)?;
        out.push(Level {
            mesh: mesh.clone(),
            spectrum,
        });
    }
    Ok(out)
}

pub(crate) fn artifact(l: &Level, critical: Option<CriticalCounts>) -> LevelArtifact {
    LevelArtifact {
        level: l.mesh.level,
        h: l.mesh.h,
        n_nodes: l.mesh.n_nodes(),
        values: l.spectrum.values(),
        gap: eigen_gap(&l.spectrum).ok(),
        critical,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    NeumannNonacute,
    MixedSingle,
    MixedDouble,
    Finiteness,
    SphereProbe,
    Onequarter,
    MixedIneq,
}

impl SuiteName {
    pub const ALL: [SuiteName; 7] = [
        SuiteName::NeumannNonacute,
        SuiteName::MixedSingle,
        SuiteName::MixedDouble,
        SuiteName::Finiteness,
        SuiteName::SphereProbe,
        SuiteName::Onequarter,
        SuiteName::MixedIneq,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::NeumannNonacute => "neumann_nonacute",
            SuiteName::MixedSingle => "mixed_single",
            SuiteName::MixedDouble => "mixed_double",
            SuiteName::Finiteness => "finiteness",
            SuiteName::SphereProbe => "sphere_probe",
            SuiteName::Onequarter => "onequarter",
            SuiteName::MixedIneq => "mixed_ineq",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// Sizes of the sampled triangle families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyCounts {
    pub hyperbolic: usize,
    pub mixed: usize,
    pub spherical: usize,
}

impl Default for FamilyCounts {
    fn default() -> Self {
        FamilyCounts {
            hyperbolic: 20,
            mixed: 10,
            spherical: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub seed: u64,
    pub settings: Settings,
    pub counts: FamilyCounts,
    pub cases: Vec<VerificationCase>,
}

/// Overall verdict over the asserted claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl SuiteReport {
    pub fn verdict(&self) -> Verdict {
        let asserted = self.cases.iter().filter(|c| c.asserted).flat_map(|c| &c.claims);
        let mut v = Verdict::Pass;
        for c in asserted {
            match c.status {
                Status::Fail => return Verdict::Fail,
                Status::Inconclusive { .. } => v = Verdict::Inconclusive,
                Status::Pass => {}
            }
        }
        v
    }

    /// CSV with columns `case,claim,status,margin,h_final`; claims of
    /// unasserted cases have status `probe`, per-edge claims are named
    /// `claim@edge`.
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("case,claim,status,margin,h_final\n");
        for c in &self.cases {
            for r in &c.claims {
                let name = match r.edge {
                    Some(e) => format!("{}@{e}", r.claim.as_str()),
                    None => r.claim.as_str().to_string(),
                };
                let status = if c.asserted { r.status.label() } else { "probe" };
                s.push_str(&format!("{},{name},{status},{:.16e},{:.16e}\n", c.id, r.margin, r.h));
            }
        }
        s
    }
}

type CaseJob = Box<dyn Fn(&Settings) -> VerificationCase + Send + Sync>;

fn jobs_for(suite: SuiteName, seed: u64, counts: FamilyCounts) -> Result<Vec<CaseJob>> {
    let mut jobs: Vec<CaseJob> = Vec::new();
    match suite {
        SuiteName::NeumannNonacute => {
            for t in hyperbolic_family(counts.hyperbolic, seed)? {
                jobs.push(Box::new(move |s| verify_hotspots_neumann(&t, s)));
            }
        }
        SuiteName::MixedSingle | SuiteName::MixedDouble => {
            let double = suite == SuiteName::MixedDouble;
            for t in mixed_family(counts.mixed, seed, double)? {
                jobs.push(Box::new(move |s| verify_mixed(&t, s)));
            }
            for t in family::mixed_controls(double)? {
                jobs.push(Box::new(move |s| verify_mixed(&t, s)));
            }
        }
        SuiteName::Finiteness => {
            for t in hyperbolic_family(counts.hyperbolic.min(5), seed)? {
                jobs.push(Box::new(move |s| verify_finiteness(&t, s)));
            }
            for base in [std::f64::consts::FRAC_PI_2, 0.45 * std::f64::consts::PI] {
                let t = exception_triangle(base)?;
                jobs.push(Box::new(move |s| verify_finiteness(&t, s)));
            }
        }
        SuiteName::SphereProbe => {
            for t in spherical_family(counts.spherical, seed)? {
                jobs.push(Box::new(move |s| sphere_margin_case(&t, s)));
            }
            for t in hyperbolic_family(counts.hyperbolic.min(3), seed)? {
                jobs.push(Box::new(move |s| sphere_margin_case(&t, s)));
            }
        }
        SuiteName::Onequarter => {
            for t in hyperbolic_family(counts.hyperbolic, seed)? {
                jobs.push(Box::new(move |s| one_quarter_case(&t, s)));
            }
        }
        SuiteName::MixedIneq => {
            for t in hyperbolic_family(counts.hyperbolic, seed)? {
                jobs.push(Box::new(move |s| mixed_inequality_case(&t, s)));
            }
        }
    }
    Ok(jobs)
}

/// Run a named suite. Cases run concurrently on `jobs` threads (the global
/// pool when `None`) and are reported in case order.
pub fn run_suite(
    suite: SuiteName,
    settings: &Settings,
    seed: u64,
    counts: FamilyCounts,
    jobs: Option<usize>,
) -> Result<SuiteReport> {
    if settings.levels < 2 {
        return Err(Error::Config("suites need at least two mesh levels".into()));
    }
    let work = jobs_for(suite, seed, counts)?;
    let run = || -> Vec<VerificationCase> {
        work.par_iter()
            .enumerate()
            .map(|(i, job)| {
                let mut c = job(settings);
                c.id = i;
                log::info!("{suite} case {i} ({}) done", c.name);
                c
            })
            .collect()
    };
    let cases = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(SuiteReport {
        suite,
        seed,
        settings: settings.clone(),
        counts,
        cases,
    })
}
