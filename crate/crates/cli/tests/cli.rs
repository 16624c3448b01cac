use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn verify(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(args)
        .env("VERIFY_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"{
  "surfaces": ["sphere:R=1", "torus:R0=2,r=0.5"],
  "scenarios": ["euler:rotating-sphere"],
  "suites": ["geometry", "quadrature"],
  "resolutions": {"geometry_points": 30, "tubular_points": 5, "surface_nodes": 24},
  "seeds": [3]
}"#;

fn records(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn list_and_filter() {
    let all = verify(&["list"], "1");
    assert!(all.status.success());
    assert!(stdout(&all).lines().count() >= 40);
    assert!(stdout(&all).contains(r"\Delta_Bv+Kv"));

    let ops = verify(&["list", "--module", "tancalc"], "1");
    let lines: Vec<String> = stdout(&ops).lines().map(String::from).collect();
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().all(|l| l.contains("tancalc")));

    let none = verify(&["list", "--module", "nonexistent"], "1");
    assert!(none.status.success());
    assert!(stdout(&none).is_empty());
}

#[test]
fn explain_known_and_unknown() {
    let ok = verify(&["explain", "gauss_bonnet"], "1");
    assert!(ok.status.success());
    assert!(stdout(&ok).contains(r"K := \kappa_1\kappa_2"));
    let bad = verify(&["explain", "no_such_check"], "1");
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("no_such_check"));
}

#[test]
fn passing_run_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let out = dir.path().join("nested/report.ndjson");
    let o = verify(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], "1");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 failed"));

    let lines = records(&out);
    assert_eq!(lines[0]["kind"], "environment");
    assert_eq!(lines[0]["seeds"], serde_json::json!([3]));
    assert_eq!(lines[0]["threads"], 1);
    let last = lines.last().unwrap();
    assert_eq!(last["kind"], "summary");
    assert_eq!(last["fail"], 0);
    for r in &lines[1..lines.len() - 1] {
        assert!(["pass", "skipped"].contains(&r["verdict"].as_str().unwrap()));
        assert!(!r["anchor"].as_str().unwrap().is_empty());
    }
    let table = fs::read_to_string(dir.path().join("nested/report.ndjson.summary.txt")).unwrap();
    assert!(table.contains("gauss_bonnet"));
}

#[test]
fn seed_and_suite_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let out = dir.path().join("r.ndjson");
    let o = verify(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "9",
            "--suite",
            "quadrature",
            "--out",
            out.to_str().unwrap(),
        ],
        "1",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines = records(&out);
    assert_eq!(lines[0]["seeds"], serde_json::json!([9]));
    let checks = &lines[1..lines.len() - 1];
    assert!(checks.iter().all(|r| r["suite"] == "quadrature" && r["seed"] == 9));

    let bad = verify(&["run", "--config", cfg.to_str().unwrap(), "--suite", "astrology"], "1");
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn negative_controls_fail_and_set_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "neg.json",
        r#"{
          "surfaces": ["sphere:R=1"],
          "scenarios": ["euler:rotating-sphere", "negative:q1-bump=0.1"],
          "suites": ["limits"],
          "resolutions": {"time_samples": 3}
        }"#,
    );
    let out = dir.path().join("neg.ndjson");
    let o = verify(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], "2");
    assert_eq!(o.status.code(), Some(1));
    let lines = records(&out);
    let checks: Vec<&Value> = lines.iter().filter(|l| l["kind"] == "check").collect();
    assert!(checks.iter().any(|r| r["negative_control"] == true));
    for r in checks {
        assert_eq!(r["verdict"] == "fail", r["negative_control"] == true, "{r}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), "empty.json", r#"{"suites": []}"#);
    let o = verify(&["run", "--config", empty.to_str().unwrap()], "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("suites"), "{}", stderr(&o));

    let broken = write_config(dir.path(), "broken.json", "{\n  \"seeds\": [1,\n}");
    let o = verify(&["run", "--config", broken.to_str().unwrap()], "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let unknown = write_config(dir.path(), "unknown.json", r#"{"surfaces": ["cube:a=1"]}"#);
    let o = verify(&["run", "--config", unknown.to_str().unwrap()], "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("surfaces[0]"), "{}", stderr(&o));

    let missing = verify(&["run", "--config", "/nonexistent/config.json"], "1");
    assert_eq!(missing.status.code(), Some(2));

    let cfg = write_config(dir.path(), "small.json", SMALL);
    let o = verify(&["run", "--config", cfg.to_str().unwrap()], "zero");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("VERIFY_THREADS"));
}

#[test]
fn reruns_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", SMALL);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = verify(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], "2");
        assert_eq!(o.status.code(), Some(0));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.ndjson"), run("b.ndjson"));
}
