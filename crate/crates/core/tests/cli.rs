use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use trt_core::harness::{selftest_suite, Level};

const CONFIG: &str = r#"{
  "seed": 3,
  "phantom": { "kind": "gaussian-bump", "order": 1, "dim": 3, "center": [0, 0, 0], "radius": 1 },
  "curve": { "kind": "three-circles", "radius": 2 },
  "grids": {
    "field": 12,
    "sphere_polar": 6,
    "sphere_azimuth": 12,
    "lambda": 64,
    "data_polar": 9,
    "data_azimuth": 16,
    "circle_nodes": 16,
    "output": 3
  },
  "steps": { "ray": 0.05, "h_xi": 1e-3, "h_p": 2e-2 },
  "probes": [[0.1, 0.0, -0.1]],
  "outputs": { "data": "data", "recon": "recon", "report": "report.txt" }
}"#;

fn trt(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trt"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run trt")
}

fn run_all(dir: &Path) {
    fs::write(dir.join("run.json"), CONFIG).unwrap();
    let sim = trt(&["simulate", "--config", "run.json"], dir);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    let rec = trt(&["reconstruct", "--config", "run.json"], dir);
    assert!(matches!(rec.status.code(), Some(0) | Some(1)), "{}", String::from_utf8_lossy(&rec.stderr));
    let val = trt(
        &["validate", "--truth", "recon/truth.trtg", "--estimate", "recon/estimate.trtg", "--report", "report.txt"],
        dir,
    );
    assert!(val.status.success(), "{}", String::from_utf8_lossy(&val.stderr));
    assert!(String::from_utf8_lossy(&val.stdout).contains("relative L2 (aggregate)"));
}

#[test]
fn pipeline_outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_all(a.path());
    run_all(b.path());
    for file in [
        "data/field.trtg",
        "data/data.trtd",
        "data/config.json",
        "recon/estimate.trtg",
        "recon/truth.trtg",
        "recon/probes.csv",
        "report.txt",
        "report.csv",
    ] {
        let x = fs::read(a.path().join(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs between runs");
    }
}

#[test]
fn curve_inside_the_guard_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CONFIG.replace(r#""radius": 2 }"#, r#""radius": 1.7 }"#);
    fs::write(dir.path().join("run.json"), cfg).unwrap();
    let out = trt(&["check-curve", "--config", "run.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("data").exists());
}

#[test]
fn check_curve_certifies_the_default_geometry() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.json"), CONFIG).unwrap();
    let out = trt(&["check-curve", "--config", "run.json", "--planes", "50"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("encompasses = true"));
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CONFIG.replace(r#""output": 3"#, r#""output": 3, "outptu": 4"#);
    fs::write(dir.path().join("run.json"), cfg).unwrap();
    let out = trt(&["simulate", "--config", "run.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_flags_a_corrupted_contraction_weight() {
    let clean = selftest_suite(Level::Quick, 0.0);
    let broken = selftest_suite(Level::Quick, 1e-3);
    let find = |r: &trt_core::harness::SelftestReport, name: &str| {
        r.checks.iter().find(|c| c.name == name).unwrap().passed
    };
    assert!(find(&clean, "polarization-oracle"));
    assert!(!find(&broken, "polarization-oracle"));
    assert!(find(&broken, "frame-gram"));
}
