use std::path::Path;
use std::process::{Command, Output};

use growthfem::config::RunConfig;
use growthfem::drivers::StripSummary;
use growthfem::io::summary::read_json;
use growthfem::verify::VerifyReport;

fn growthfem(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_growthfem")).args(args).current_dir(cwd).output().unwrap()
}

fn tiny_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("tiny.json");
    let text = format!(
        r#"{{"geometry": {{"ly": 4, "ny": 8}}, "growth": {{"g_max": 0.0003}},
            "outputs": {{"vtu_every_n_steps": 0, "checkpoint_every_g": null}}{extra}}}"#
    );
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_passes_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = growthfem(&["verify", "--out", "report"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: VerifyReport = read_json(&dir.path().join("report/verify_report.json")).unwrap();
    assert!(report.passed);
    assert!(report.checks.len() >= 12);
}

#[test]
fn invalid_config_exits_with_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"materials": {"film": {"mu0": -1, "penalty_lambda": 1e5, "mu_fiber": 100, "n0": [0, 1, 0], "tension_only": false}}}"#,
    )
    .unwrap();
    for cmd in ["verify", "strip", "rve"] {
        let out = growthfem(&[cmd, "--config", path.to_str().unwrap()], dir.path());
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("materials.film.mu0"));
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn rve_without_a_wavelength_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = growthfem(&["rve"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("study.lambda_cr"));
}

#[test]
fn strip_honors_overrides_and_writes_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "");
    let out = growthfem(&["strip", "--config", &cfg, "--out", "run", "--mu-fiber", "0,750", "--mesh-scale", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    let resolved = RunConfig::load(&run.join("config.json")).unwrap();
    assert_eq!(resolved.study.mu_fibers, vec![0.0, 750.0]);
    assert_eq!((resolved.geometry.nx, resolved.geometry.ny, resolved.geometry.nz_subs), (4, 16, 14));
    let case = RunConfig::load(&run.join("mu_750/config.json")).unwrap();
    assert_eq!(case.materials.film.mu_fiber, 750.0);
    let table: StripSummary = read_json(&run.join("strip_summary.json")).unwrap();
    assert_eq!(table.cases.iter().map(|c| c.mu_fiber).collect::<Vec<_>>(), vec![0.0, 750.0]);
}

#[test]
fn worker_processes_match_a_serial_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "");
    let serial = growthfem(&["strip", "--config", &cfg, "--out", "serial", "--mu-fiber", "100,2500"], dir.path());
    let pooled =
        growthfem(&["strip", "--config", &cfg, "--out", "pooled", "--mu-fiber", "100,2500", "--jobs", "2"], dir.path());
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(pooled.status.code(), Some(0));
    for case in ["mu_100", "mu_2500"] {
        let a = std::fs::read(dir.path().join("serial").join(case).join("timeseries.csv")).unwrap();
        let b = std::fs::read(dir.path().join("pooled").join(case).join("timeseries.csv")).unwrap();
        assert_eq!(a, b, "{case}");
    }
    assert!(dir.path().join("pooled/strip_summary.csv").exists());
}

#[test]
fn stalled_continuation_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), r#", "continuation": {"newton_max_iter": 1, "max_halvings": 1}"#);
    let out = growthfem(&["strip", "--config", &cfg, "--mu-fiber", "100"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    // The partial table still records the case.
    let table: StripSummary = read_json(&dir.path().join("out/strip_summary.json")).unwrap();
    assert_eq!(table.cases.len(), 1);
}

#[test]
fn resume_continues_from_the_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let short = tiny_config(dir.path(), "");
    let text = std::fs::read_to_string(&short).unwrap().replace(r#""checkpoint_every_g": null"#, r#""checkpoint_every_g": 0.0001"#);
    std::fs::write(&short, &text).unwrap();
    assert_eq!(growthfem(&["strip", "--config", &short, "--mu-fiber", "100"], dir.path()).status.code(), Some(0));
    let long = dir.path().join("long.json");
    std::fs::write(&long, text.replace("0.0003", "0.0005")).unwrap();
    let out = growthfem(&["strip", "--config", long.to_str().unwrap(), "--mu-fiber", "100", "--resume"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("out/mu_100/timeseries.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5);
}
