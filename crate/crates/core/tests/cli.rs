use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

struct Run {
    code: Option<i32>,
    out: PathBuf,
    _tmp: tempfile::TempDir,
}

impl Run {
    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn json(&self, name: &str) -> serde_json::Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

fn curvspec(cmd: &str, config: &str, extra: &[&str]) -> Run {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = tmp.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_curvspec"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .status()
        .unwrap();
    Run {
        code: status.code(),
        out,
        _tmp: tmp,
    }
}

const RIGHT_ISOSCELES: &str = r#""triangle": {"curvature": 0, "chart": "klein", "vertices": [[0,0],[1,0],[0,1]]}"#;

fn spectrum_values(csv: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,value,residual"));
    lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

fn no_output(r: &Run) -> bool {
    !Path::new(&r.out).exists()
}

#[test]
fn solve_right_isosceles() {
    let cfg = format!(r#"{{{RIGHT_ISOSCELES}, "mesh": {{"h": 0.02, "grading": 1, "levels": 2}}}}"#);
    let r = curvspec("solve", &cfg, &["--emit-svg"]);
    assert_eq!(r.code, Some(0));
    let values = spectrum_values(&r.read("spectrum.csv"));
    assert!(values[0].abs() < 1e-8);
    assert!((values[1] - PI * PI).abs() < 1e-3, "mu2 = {}", values[1]);
    let svg = r.read("nodal.svg");
    assert_eq!(svg.matches("<path").count(), 1);
    let report = r.json("report.json");
    assert!(report.get("principal").is_some());
    let meta = r.json("meta.json");
    assert_eq!(meta["exit_code"], 0);
}

#[test]
fn solve_without_svg_flag_writes_no_svg() {
    let cfg = format!(r#"{{{RIGHT_ISOSCELES}, "mesh": {{"h_rel": 0.1}}}}"#);
    let r = curvspec("solve", &cfg, &[]);
    assert_eq!(r.code, Some(0));
    assert!(!r.out.join("nodal.svg").exists());
    assert!(r.out.join("spectrum.csv").exists());
}

#[test]
fn malformed_json_is_a_config_error() {
    let r = curvspec("solve", r#"{"triangle": {"curvature": 0,"#, &[]);
    assert_eq!(r.code, Some(3));
    assert!(no_output(&r));
}

#[test]
fn unknown_key_is_a_config_error() {
    let cfg = format!(r#"{{{RIGHT_ISOSCELES}, "mesh": {{"hh": 0.1}}}}"#);
    let r = curvspec("solve", &cfg, &[]);
    assert_eq!(r.code, Some(3));
    assert!(no_output(&r));
}

#[test]
fn missing_section_is_a_config_error() {
    let r = curvspec("sweep", &format!("{{{RIGHT_ISOSCELES}}}"), &[]);
    assert_eq!(r.code, Some(3));
    assert!(no_output(&r));
    let r = curvspec("verify", "{}", &[]);
    assert_eq!(r.code, Some(3));
}

#[test]
fn invalid_triangle_is_a_config_error() {
    let cfg = r#"{"triangle": {"curvature": 0, "chart": "klein", "vertices": [[0,0],[1,0],[2,0]]}}"#;
    let r = curvspec("solve", cfg, &[]);
    assert_eq!(r.code, Some(3));
}

#[test]
fn solver_budget_exhaustion_exits_2() {
    let cfg = format!(r#"{{{RIGHT_ISOSCELES}, "mesh": {{"h_rel": 0.1}}, "solver": {{"k": 4, "tol": 1e-14, "max_iter": 1, "shift": null}}}}"#);
    let r = curvspec("solve", &cfg, &[]);
    assert_eq!(r.code, Some(2));
    assert_eq!(r.json("meta.json")["exit_code"], 2);
}

#[test]
fn onequarter_suite_passes_with_margin() {
    let r = curvspec("verify", r#"{"suite": {"name": "onequarter", "seed": 1}}"#, &["--jobs", "4"]);
    assert_eq!(r.code, Some(0));
    let csv = r.read("summary.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("case,claim,status,margin,h_final"));
    let margins: Vec<f64> = lines
        .filter(|l| l.split(',').nth(1) == Some("one_quarter"))
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(margins.len(), 20);
    assert!(margins.iter().all(|&m| m > 0.01), "{margins:?}");
    assert!(r.json("suite.json").is_object());
}

#[test]
fn sphere_probe_never_fails() {
    let r = curvspec("verify", r#"{"suite": {"name": "sphere_probe"}}"#, &[]);
    assert_eq!(r.code, Some(0));
    assert!(r.read("summary.csv").lines().skip(1).all(|l| l.contains(",probe,")));
}

#[test]
fn hyperbolic_sweep_has_no_crossings() {
    let cfg = r#"{
        "triangle": {"curvature": 0, "chart": "klein", "vertices": [[0,0],[0.5,0],[-0.2,0.4]]},
        "sweep": {"kappa_start": 0, "kappa_end": -1, "steps": 10}
    }"#;
    let r = curvspec("sweep", cfg, &[]);
    assert_eq!(r.code, Some(0));
    let ev = r.json("events.json");
    assert_eq!(ev["crossings_of_tracked"], 0);
    assert_eq!(ev["zero_everywhere"], true);
    let csv = r.read("branches.csv");
    assert!(csv.starts_with("t,kappa,branch,value,overlap,crit_count\n"));
}

#[test]
fn flat_sweep_is_constant() {
    let cfg = r#"{
        "triangle": {"curvature": 0, "chart": "klein", "vertices": [[0,0],[0.5,0],[-0.2,0.4]]},
        "sweep": {"kappa_start": 0, "kappa_end": 0, "steps": 4, "k": 3}
    }"#;
    let r = curvspec("sweep", cfg, &[]);
    assert_eq!(r.code, Some(0));
    let csv = r.read("branches.csv");
    let mut by_branch: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for l in csv.lines().skip(1) {
        let f: Vec<&str> = l.split(',').collect();
        by_branch.entry(f[2].parse().unwrap()).or_default().push(f[3].parse().unwrap());
    }
    assert_eq!(by_branch.len(), 3);
    for v in by_branch.values() {
        assert_eq!(v.len(), 5);
        assert!(v.iter().all(|x| x == &v[0]));
    }
}

#[test]
fn sweep_leaving_the_domain_keeps_partial_output() {
    let cfg = r#"{
        "triangle": {"curvature": 0, "chart": "klein", "vertices": [[0,0],[0.9,0],[0,0.9]]},
        "sweep": {"kappa_start": 0, "kappa_end": -1.3, "steps": 10, "k": 3}
    }"#;
    let r = curvspec("sweep", cfg, &[]);
    assert_eq!(r.code, Some(2));
    let csv = r.read("branches.csv");
    assert!(csv.lines().count() > 1);
    assert!(r.json("events.json")["failure"].is_string());
}

#[test]
fn usage_errors_exit_3() {
    let status = Command::new(env!("CARGO_BIN_EXE_curvspec"))
        .args(["solve", "--bogus"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
