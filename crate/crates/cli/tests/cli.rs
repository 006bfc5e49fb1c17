use std::path::Path;
use std::process::{Command, Output};

use lplab_cli::RunReport;
use serde_json::Value;

fn lplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lplab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_report(dir: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn swap_transfer_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scenario": "transfer", "p": 1, "q": 2, "seed": 1,
            "instance": {"random": {"group": "Z2", "kind": "nonsingular", "weights": [1, 2]}}}"#,
    );
    let out = dir.path().join("out");
    let o = lplab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_report(&out);
    assert!(r.pass);
    assert_eq!(r.artifacts, vec!["certificate.csv", "plots/transfer-ratio.svg"]);
    for a in &r.artifacts {
        assert!(out.join(a).is_file(), "{a}");
    }
    // The report embeds the effective config.
    assert_eq!(r.config["instance"]["random"]["weights"], serde_json::json!([1.0, 2.0]));
    assert_eq!(r.config["tol"], serde_json::json!(1e-6));
    let csv = std::fs::read_to_string(out.join("certificate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("instance,group_order,atoms,element,psi,lhs,rhs,rel_err\n"));
}

#[test]
fn zero_cocycle_gives_all_zero_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scenario": "transfer", "p": 1.5, "q": 3, "seed": 4, "plots": false,
            "instance": {"random": {"group": "S3", "kind": "nonsingular", "atoms": 5, "translation": "zero"}}}"#,
    );
    let out = dir.path().join("out");
    let o = lplab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_report(&out);
    assert_eq!(r.artifacts, vec!["certificate.csv"]);
    let cert = &r.checks[0].detail["certificate"];
    for e in cert["elements"].as_array().unwrap() {
        for key in ["psi", "lhs", "rhs", "rel_err"] {
            assert_eq!(e[key], Value::from(0.0), "{key}");
        }
    }
}

#[test]
fn exponent_order_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scenario": "lemma-scaling", "p": 2, "q": 2}"#,
    );
    let o = lplab(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("/q") && err.contains("exponent order violation"), "{err}");
    assert!(!dir.path().join("o").exists());
    assert_eq!(lplab(&["validate", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn failing_check_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scenario": "lemma-scaling", "p": 1, "q": 2, "tol": 1e-3, "magnitudes": [1, 3], "max_rel_err": 1e-300}"#,
    );
    let out = dir.path().join("out");
    let o = lplab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = read_report(&out);
    assert!(!r.pass);
    assert_eq!(r.first_failure.as_deref(), Some("scaling-law"));
    let shown = lplab(&["report", out.to_str().unwrap()]);
    assert_eq!(shown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&shown.stdout).contains("first failing check: scaling-law"));
}

#[test]
fn seed_and_tol_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"scenario": "cnd", "pairs": 2}"#);
    assert_eq!(lplab(&["validate", "--config", &cfg]).status.code(), Some(2));
    let o = lplab(&["validate", "--config", &cfg, "--seed", "12", "--tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(0));
    let echo: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(echo["seed"], Value::from(12));
    assert_eq!(echo["tol"], Value::from(1e-8));
    assert_eq!(echo["scenario"], Value::from("cnd"));
}

#[test]
fn generated_instance_feeds_a_file_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let o = lplab(&[
        "generate", "--group", "Z2", "--kind", "nonsingular", "--weights", "1,2", "--p", "2", "--seed", "8", "--out",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(doc["action"]["linear"]["1"]["perm"], serde_json::json!([1, 0]));
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scenario": "transfer", "p": 2, "q": 4, "instance": {"file": "inst.json"}, "out": "res"}"#,
    );
    let o = lplab(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read_report(&dir.path().join("res")).pass);
}

#[test]
fn generate_rejects_unknown_groups() {
    let o = lplab(&["generate", "--group", "Q8", "--kind", "nonsingular", "--seed", "1"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported group"));
}

#[test]
fn thread_count_does_not_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scenario": "gaussian", "seed": 5, "samples": 40000, "pairs": 2, "p": 1.5}"#,
    );
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_lplab"))
            .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
            .env("LAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        reports.push(std::fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}
