use crate::continuation::{CurvaturePath, SweepOptions};
use crate::fem::SolverOptions;
use crate::geometry::{chart_convert, Chart, TriangleSpec};
use crate::theorems::{FamilyCounts, Settings, SuiteName};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Configuration file shared by all subcommands; each reads the sections it
/// needs and rejects a config missing them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub triangle: Option<TriangleSpec>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: Option<SolverOptions>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub suite: Option<SuiteConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// absolute size of the generated mesh
    pub h: Option<f64>,
    /// size relative to the longest Poincaré-chart side, used when `h` is absent
    pub h_rel: Option<f64>,
    pub grading: Option<f64>,
    /// generated mesh plus `levels - 1` quadrisections
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub crit_tol_rel: f64,
    pub nodal: bool,
    pub killing_margin: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            crit_tol_rel: 1e-3,
            nodal: true,
            killing_margin: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kappa_start: f64,
    pub kappa_end: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_branches")]
    pub k: usize,
    #[serde(default)]
    pub tracked: Option<usize>,
    /// also run with halved steps and report the comparison
    #[serde(default)]
    pub check_halving: bool,
}

fn default_steps() -> usize {
    20
}

fn default_branches() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub name: SuiteName,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub counts: FamilyCounts,
}

/// Output file names inside the `--out` directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub spectrum: String,
    pub report: String,
    pub svg: String,
    pub suite: String,
    pub summary: String,
    pub branches: String,
    pub events: String,
    pub meta: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            spectrum: "spectrum.csv".into(),
            report: "report.json".into(),
            svg: "nodal.svg".into(),
            suite: "suite.json".into(),
            summary: "summary.csv".into(),
            branches: "branches.csv".into(),
            events: "events.json".into(),
            meta: "meta.json".into(),
        }
    }
}

impl OutputConfig {
    fn names(&self) -> [&str; 8] {
        [
            &self.spectrum,
            &self.report,
            &self.svg,
            &self.suite,
            &self.summary,
            &self.branches,
            &self.events,
            &self.meta,
        ]
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| bad(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| bad(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> Result<()> {
        let m = &self.mesh;
        if let Some(h) = m.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(bad(format!("mesh.h = {h} must be positive")));
            }
        }
        if let Some(r) = m.h_rel {
            if !(r > 0.0 && r < 1.0) {
                return Err(bad(format!("mesh.h_rel = {r} outside (0, 1)")));
            }
        }
        if let Some(g) = m.grading {
            if !(1.0..=4.0).contains(&g) {
                return Err(bad(format!("mesh.grading = {g} outside [1, 4]")));
            }
        }
        if let Some(l) = m.levels {
            if !(1..=6).contains(&l) {
                return Err(bad(format!("mesh.levels = {l} outside 1..=6")));
            }
        }
        if let Some(s) = &self.solver {
            if s.k == 0 || !(s.tol > 0.0) || s.max_iter == 0 {
                return Err(bad("solver needs k ≥ 1, tol > 0 and max_iter ≥ 1"));
            }
        }
        let a = &self.analysis;
        if !(a.crit_tol_rel > 0.0 && a.crit_tol_rel < 1.0) || !(a.killing_margin >= 0.0) {
            return Err(bad("analysis tolerances out of range"));
        }
        for n in self.output.names() {
            if n.is_empty() || n.contains(['/', '\\']) || n == "." || n == ".." {
                return Err(bad(format!("output name {n:?} must be a plain file name")));
            }
        }
        if let Some(t) = &self.triangle {
            t.build()?;
        }
        Ok(())
    }

    pub fn triangle(&self) -> Result<&TriangleSpec> {
        self.triangle.as_ref().ok_or_else(|| bad("missing triangle section"))
    }

    pub fn suite(&self) -> Result<&SuiteConfig> {
        self.suite.as_ref().ok_or_else(|| bad("missing suite section"))
    }

    /// Suite settings: defaults overridden by the mesh, solver and analysis sections.
    pub fn settings(&self) -> Result<Settings> {
        let d = Settings::default();
        let s = Settings {
            h_rel: self.mesh.h_rel.unwrap_or(d.h_rel),
            grading: self.mesh.grading.unwrap_or(d.grading),
            levels: self.mesh.levels.unwrap_or(d.levels),
            solver: self.solver.unwrap_or(d.solver),
            crit_tol_rel: self.analysis.crit_tol_rel,
            margin: self.analysis.killing_margin,
        };
        if self.mesh.h.is_some() {
            return Err(bad("suites size meshes relative to each triangle; use mesh.h_rel"));
        }
        if s.levels < 2 {
            return Err(bad("suites need mesh.levels ≥ 2"));
        }
        Ok(s)
    }

    /// Path and sweep options; the triangle's vertices are taken to the
    /// Klein chart at its own curvature.
    pub fn sweep(&self) -> Result<(CurvaturePath, SweepOptions)> {
        let s = self.sweep.as_ref().ok_or_else(|| bad("missing sweep section"))?;
        let spec = self.triangle()?;
        let t = spec.build()?;
        let mut vertices = [[0.0; 2]; 3];
        for (v, p) in vertices.iter_mut().zip(&t.vertices) {
            let k = chart_convert(*p, Chart::Klein, t.kappa)?;
            *v = [k.x, k.y];
        }
        let path = CurvaturePath {
            vertices,
            bc: spec.bc,
            kappa_start: s.kappa_start,
            kappa_end: s.kappa_end,
        };
        let d = SweepOptions::default();
        let o = SweepOptions {
            k: s.k,
            steps: s.steps,
            h: self.mesh.h,
            h_rel: self.mesh.h_rel.unwrap_or(d.h_rel),
            grading: self.mesh.grading.unwrap_or(d.grading),
            solver: self.solver.unwrap_or(d.solver),
            crit_tol_rel: self.analysis.crit_tol_rel,
            tracked: s.tracked,
            ..d
        };
        if self.mesh.levels.is_some_and(|l| l != 1) {
            return Err(bad("sweeps use a single mesh; mesh.levels must be 1"));
        }
        Ok((path, o))
    }
}
