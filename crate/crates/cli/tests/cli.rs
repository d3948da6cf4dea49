use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn jleg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jleg")).args(args).output().expect("spawn jleg")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

const SMALL_FOLIATION: &str = r#""foliation": {"t_nodes": 9}"#;

#[test]
fn acs_check_standard_and_corrupted() {
    let dir = tempfile::tempdir().unwrap();
    let std = write(dir.path(), "std.json", r#"{"builtin": "standard"}"#);
    let o = jleg(&["acs-check", "--acs", &std, "--samples", "200"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["identities"]["pass"], true);

    // J^2 != -Id once one entry is scaled
    let bad = write(dir.path(), "bad.json", r#"{"matrix": [[0,0,0,-1],[0,0,-1,0],[0,1.5,0,0],[1,0,0,0]]}"#);
    let o = jleg(&["acs-check", "--acs", &bad, "--samples", "50"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("J^2 = -Id"));
    let failing = &stdout_json(&o)["failing"];
    assert!(failing.as_array().unwrap().iter().any(|f| f == "J^2 = -Id"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&jleg(&["acs-check", "--acs", "/definitely/missing.json"])), 2);
    assert_eq!(code(&jleg(&["verify-scenario", "s7"])), 2);
    assert_eq!(code(&jleg(&["verify-scenario"])), 2);
    assert_eq!(code(&jleg(&["solve-disk", "--grid", "32"])), 2);
    let typo = write(dir.path(), "typo.json", r#"{"sovler": {"n": 33}}"#);
    assert_eq!(code(&jleg(&["solve-disk", "--config", &typo])), 2);
    let leaf = write(dir.path(), "leaf.json", &format!("{{{SMALL_FOLIATION}}}"));
    assert_eq!(code(&jleg(&["leaf-of", "--config", &leaf, "--grid", "17"])), 2);
    assert_eq!(code(&jleg(&["no-such-command"])), 2);
}

#[test]
fn verify_s5_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|sub| {
            let out = dir.path().join(sub);
            let o = jleg(&["verify-scenario", "s5", "--samples", "20", "--seed", "7", "--out", out.to_str().unwrap()]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            std::fs::read(out.join("report.json")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let report: Value = serde_json::from_slice(&runs[0]).unwrap();
    assert_eq!(report["report"]["pass"], true);
    assert_eq!(report["report"]["n_points"], 20);

    let other = jleg(&["verify-scenario", "s5", "--samples", "20", "--seed", "8"]);
    assert_ne!(other.stdout, runs[0]);
}

#[test]
fn n5_and_cy_scenarios_run() {
    let o = jleg(&["verify-scenario", "n5", "--samples", "10"]);
    assert_eq!(code(&o), 0);
    let o = jleg(&["verify-scenario", "cy", "--samples", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["report"]["scenario"], "cy_levelset");
}

#[test]
fn solve_disk_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"acs": {"coeffs": {"sigma": "0.01*x1", "beta": "0", "gamma": "1", "delta": "0"}},
            "disk": {"p": [0, 0.1, 0.1, 0, 0], "x": [0.3, 0.2]}}"#,
    );
    let mut reports = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let o = jleg(&["solve-disk", "--config", &cfg, "--grid", "17", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        for f in ["report.json", "f.csv", "t.csv", "patch.csv"] {
            assert!(out.join(f).exists(), "{f}");
        }
        reports.push(std::fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let r: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(r["run"]["n"], 17);
    assert!(r["disk"]["max_ratio"].as_f64().unwrap() < 1.0);
    assert!(r["run"]["epsilon"].as_f64().unwrap() > 0.0);
}

#[test]
fn flat_intersection_is_a_single_positive_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "i.json",
        &format!(r#"{{{SMALL_FOLIATION}, "patch": {{"p": [0, 0, 0, 0, 0], "x": [0.5, 0]}}}}"#),
    );
    let o = jleg(&["intersect", "--config", &cfg, "--grid", "17"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let recs = stdout_json(&o)["records"].as_array().unwrap().clone();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["sign"], 1);
    assert_eq!(recs[0]["transversal"], true);

    let far = write(
        dir.path(),
        "far.json",
        &format!(r#"{{{SMALL_FOLIATION}, "patch": {{"p": [0, 3, 3, 0, 0], "x": [0, 0]}}}}"#),
    );
    let o = jleg(&["intersect", "--config", &far, "--grid", "17"]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["records"].as_array().unwrap().is_empty());
}

#[test]
fn leaf_of_single_and_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "q.json", &format!(r#"{{{SMALL_FOLIATION}, "q": [0.2, 0.1, 0.1, 0.3, 0.1]}}"#));
    let o = jleg(&["leaf-of", "--config", &cfg, "--grid", "17"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["successes"], 1);
    assert!(r["records"][0]["gap"].as_f64().unwrap() < 1e-6);

    let cfg = write(dir.path(), "c.json", &format!("{{{SMALL_FOLIATION}}}"));
    let out = dir.path().join("cov");
    let o = jleg(&["leaf-of", "--config", &cfg, "--grid", "17", "--samples", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("4/4"));
}

#[test]
fn foliate_writes_leaf_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &format!("{{{SMALL_FOLIATION}}}"));
    let out = dir.path().join("leaf");
    let o = jleg(&["foliate", "--config", &cfg, "--grid", "17", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("leaf/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["disks"].as_array().unwrap().len(), 9);
    assert!(out.join("leaf/disk_008.csv").exists());
}
