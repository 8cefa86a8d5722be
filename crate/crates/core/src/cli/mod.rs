//! Batch front end: `solve`, `verify` and `sweep` read a JSON config and
//! write CSV, JSON and SVG files into an output directory.

mod config;
pub mod svg;

pub use config::{AnalysisConfig, MeshConfig, OutputConfig, RunConfig, SuiteConfig, SweepConfig};

use crate::analysis::{detect_critical_points, extract_nodal_set, vertex_coefficients, CriticalReport, NodalSet, VertexExpansion};
use crate::continuation::{compare_sweeps, sweep_partial, track_critical_points, HalvingCheck, SweepEvent, SweepOptions};
use crate::fem::{assemble_mesh, solve_with, MeshInfo};
use crate::geometry::{triangle_area, TriangleSpec};
use crate::mesh::{generate, refine};
use crate::theorems::{killing_summary, mesh_size, run_suite, KillingSummary, Verdict};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "curvspec", version, about = "Eigenproblems on geodesic triangles of constant curvature")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one triangle and analyse its principal eigenfunction
    Solve(RunArgs),
    /// Run a verification suite
    Verify(RunArgs),
    /// Follow eigenvalue branches along a curvature path
    Sweep(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// worker threads for suite cases
    #[arg(long)]
    pub jobs: Option<usize>,
    /// also write the nodal plot (solve)
    #[arg(long)]
    pub emit_svg: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Verify(_) => "verify",
            Command::Sweep(_) => "sweep",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Solve(a) | Command::Verify(a) | Command::Sweep(a) => a,
        }
    }
}

/// Exit code for an error that ends a run.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoConvergence { .. } | Error::StepFailure { .. } => EXIT_SOLVER,
        Error::Config(_)
        | Error::Json(_)
        | Error::Domain(_)
        | Error::DegenerateTriangle(_)
        | Error::UnsupportedConversion(_) => EXIT_CONFIG,
        _ => EXIT_FAIL,
    }
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: String,
    jobs: Option<usize>,
    started_unix: u64,
    elapsed_seconds: f64,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Run a parsed command and return its exit code. Errors are reported on
/// standard error; a config error leaves the output directory untouched.
pub fn run(cli: &Cli) -> u8 {
    let args = cli.command.args();
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let cfg = match RunConfig::load(&args.config).and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(&cfg, a),
        Command::Verify(a) => cmd_verify(&cfg, a),
        Command::Sweep(a) => cmd_sweep(&cfg, a),
    };
    let (code, error) = match result {
        Ok(c) => (c, None),
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code(&e), Some(e.to_string()))
        }
    };
    // a config problem found by a command leaves nothing behind either
    if code != EXIT_CONFIG && args.out.is_dir() {
        let meta = Meta {
            tool: "curvspec",
            version: env!("CARGO_PKG_VERSION"),
            command: cli.command.name(),
            config: args.config.display().to_string(),
            jobs: args.jobs,
            started_unix,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            exit_code: code,
            error,
        };
        if let Err(e) = write_json(&args.out, &cfg.output.meta, &meta) {
            eprintln!("error: {e}");
        }
    }
    code
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    write(dir, name, &s)
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    values: Vec<f64>,
    residuals: Vec<f64>,
    shift: f64,
    iterations: usize,
}

/// Contents of `report.json`.
#[derive(Debug, Serialize)]
pub struct SolveReport {
    triangle: TriangleSpec,
    angles: [f64; 3],
    area: f64,
    mesh: MeshInfo,
    spectrum: SpectrumSummary,
    /// index of the analysed eigenpair
    principal: usize,
    critical: Option<CriticalReport>,
    nodal: Option<NodalSet>,
    vertex_expansions: Vec<VertexExpansion>,
    killing: Option<KillingSummary>,
    warnings: Vec<String>,
}

fn cmd_solve(cfg: &RunConfig, a: &RunArgs) -> Result<u8> {
    let spec = cfg.triangle()?;
    let t = spec.build()?;
    let h = match (cfg.mesh.h, cfg.mesh.h_rel) {
        (Some(h), _) => h,
        (None, r) => mesh_size(&t, r.unwrap_or(0.05))?,
    };
    let grading = cfg.mesh.grading.unwrap_or(2.0);
    let levels = cfg.mesh.levels.unwrap_or(1);
    let opts = cfg.solver.unwrap_or_default();
    prepare_out(&a.out)?;
    let mut mesh = generate(&t, h, grading)?;
    for _ in 1..levels {
        mesh = refine(&mesh)?;
    }
    let p = assemble_mesh(&mesh)?;
    let spectrum = match solve_with(&p, &opts) {
        Ok(s) => s,
        Err(Error::NoConvergence { max_iterations, partial }) => {
            write(&a.out, &cfg.output.spectrum, &partial.to_csv())?;
            return Err(Error::NoConvergence { max_iterations, partial });
        }
        Err(e) => return Err(e),
    };
    write(&a.out, &cfg.output.spectrum, &spectrum.to_csv())?;
    let principal = usize::from(spectrum.is_neumann());
    let mut warnings = Vec::new();
    let (mut critical, mut nodal, mut killing) = (None, None, None);
    let mut expansions = Vec::new();
    if let Some(u) = spectrum.principal() {
        match detect_critical_points(u, &mesh, Some(cfg.analysis.crit_tol_rel)) {
            Ok(r) => critical = Some(r),
            Err(e) => warnings.push(format!("critical points: {e}")),
        }
        if cfg.analysis.nodal && spectrum.is_neumann() {
            nodal = Some(extract_nodal_set(u, &mesh));
        }
        for v in 0..3 {
            match vertex_coefficients(u, &mesh, v) {
                Ok(x) => expansions.push(x),
                Err(e) => warnings.push(format!("vertex {v}: {e}")),
            }
        }
        match killing_summary(&mesh, u, cfg.analysis.killing_margin) {
            Ok(k) => killing = Some(k),
            Err(e) => warnings.push(format!("killing: {e}")),
        }
        if a.emit_svg {
            let line = nodal.clone().unwrap_or_else(|| extract_nodal_set(u, &mesh));
            write(&a.out, &cfg.output.svg, &svg::render(&mesh, &u.vector, &line, critical.as_ref()))?;
        }
    } else {
        warnings.push("spectrum has no principal pair".into());
    }
    let report = SolveReport {
        triangle: spec.clone(),
        angles: t.angles,
        area: triangle_area(&t)?,
        mesh: spectrum.mesh.clone(),
        spectrum: SpectrumSummary {
            values: spectrum.values(),
            residuals: spectrum.pairs.iter().map(|p| p.residual).collect(),
            shift: spectrum.shift,
            iterations: spectrum.iterations,
        },
        principal,
        critical,
        nodal,
        vertex_expansions: expansions,
        killing,
        warnings,
    };
    write_json(&a.out, &cfg.output.report, &report)?;
    Ok(EXIT_OK)
}

fn cmd_verify(cfg: &RunConfig, a: &RunArgs) -> Result<u8> {
    let suite = cfg.suite()?;
    let settings = cfg.settings()?;
    if a.jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    prepare_out(&a.out)?;
    let report = run_suite(suite.name, &settings, suite.seed, suite.counts, a.jobs)?;
    write_json(&a.out, &cfg.output.suite, &report)?;
    write(&a.out, &cfg.output.summary, &report.summary_csv())?;
    Ok(match report.verdict() {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

/// Contents of `events.json`.
#[derive(Debug, Serialize)]
struct EventLog {
    tracked: usize,
    steps: usize,
    crossings_of_tracked: usize,
    events: Vec<SweepEvent>,
    critical_counts: Vec<usize>,
    expects_zero: bool,
    zero_everywhere: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_halving: Option<HalvingCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

fn cmd_sweep(cfg: &RunConfig, a: &RunArgs) -> Result<u8> {
    let (path, opts) = cfg.sweep()?;
    let halving = cfg.sweep.as_ref().is_some_and(|s| s.check_halving);
    // option errors surface before anything is written
    if opts.k == 0 || opts.steps == 0 {
        return Err(Error::Config("sweep needs k ≥ 1 and steps ≥ 1".into()));
    }
    prepare_out(&a.out)?;
    let (data, err) = sweep_partial(&path, &opts);
    if let Some(e @ Error::Config(_)) = err {
        return Err(e);
    }
    let Some(data) = data else {
        return Err(err.unwrap_or_else(|| Error::Config("sweep produced no data".into())));
    };
    let mut check = None;
    if halving && err.is_none() {
        let fine = SweepOptions {
            steps: 2 * opts.steps,
            ..opts.clone()
        };
        match sweep_partial(&path, &fine) {
            (Some(f), None) => check = Some(compare_sweeps(&data, &f, 2.0 * opts.solver.tol)),
            (_, Some(e)) => log::warn!("halved-step rerun failed: {e}"),
            _ => {}
        }
    }
    let pers = track_critical_points(&data);
    let log = EventLog {
        tracked: data.tracked,
        steps: data.steps.len(),
        crossings_of_tracked: data.crossings_of(data.tracked),
        events: data.events(),
        critical_counts: pers.rows.iter().map(|r| r.count).collect(),
        expects_zero: pers.expects_zero,
        zero_everywhere: pers.zero_everywhere,
        step_halving: check.clone(),
        failure: err.as_ref().map(|e| e.to_string()),
    };
    write(&a.out, &cfg.output.branches, &data.to_csv())?;
    write_json(&a.out, &cfg.output.events, &log)?;
    if let Some(e) = err {
        return Err(e);
    }
    let failed = pers.zero_everywhere == Some(false)
        || (pers.expects_zero && log.crossings_of_tracked > 0)
        || check.is_some_and(|c| !c.consistent);
    Ok(if failed { EXIT_FAIL } else { EXIT_OK })
}

