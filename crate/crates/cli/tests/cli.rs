use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn dplus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dplus")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    path.to_string_lossy().into_owned()
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn structure_constants_virasoro() {
    let out = dplus(&["structure-constants", "--r", "0", "--s", "0", "--m", "2", "--n", "-2"]);
    assert!(out.status.success());
    let v = json_stdout(&out);
    assert_eq!(v["0"], "4");
    assert_eq!(v["central"], "2/3");

    let v = json_stdout(&dplus(&["structure-constants", "--r", "1", "--s", "2", "--m", "0", "--n", "0"]));
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["1", "2", "3", "central"]);
}

#[test]
fn bernoulli_table() {
    let v = json_stdout(&dplus(&["bernoulli", "--k-max", "4", "--v", "1"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[2]["B_k"], "1/6");
    assert_eq!(rows[2]["zeta(1-k)"], "-1/12");
    assert_eq!(rows[1]["B_k(v)"], "1/2");
    assert_eq!(rows[1]["B_k"], "-1/2");
}

#[test]
fn delta_check_passes() {
    let out = dplus(&["delta-check", "--p", "2", "--window", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_stdout(&out)["status"], "pass");
}

#[test]
fn verify_small_config_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let config = fixture("small.json");
    let first = dplus(&["verify", "--config", &config, "--out", a.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = dplus(&["verify", "--config", &config, "--jobs", "2", "--out", b.to_str().unwrap()]);
    assert_eq!(second.status.code(), Some(0));
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let reports: Value = serde_json::from_slice(&a).unwrap();
    let reports = reports.as_array().unwrap();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r["status"] == "pass" && r["ms"] == 0));
}

#[test]
fn corrupted_cocycle_fails_with_witness() {
    let out = dplus(&["verify", "--config", &fixture("corrupted_cocycle.json")]);
    assert_eq!(out.status.code(), Some(1));
    let reports = json_stdout(&out);
    let failing: Vec<&Value> = reports.as_array().unwrap().iter().filter(|r| r["status"] == "fail").collect();
    assert!(failing.iter().any(|r| r["check"] == "bl2coc"));
    assert!(failing.iter().any(|r| r["check"] == "main1"));
    assert!(failing.iter().all(|r| !r["witness"].is_null()));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn inline_flags_override_config() {
    let out = dplus(&[
        "verify", "--suite", "virasoro,corrections", "--p", "3", "--dims", "0,1,1", "--mode-range", "1", "--weight-cap", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json_stdout(&out);
    for r in reports.as_array().unwrap() {
        assert_eq!(r["params"]["p"], 3);
    }
}

#[test]
fn config_errors_exit_2() {
    let missing = dplus(&["verify", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let unknown = dplus(&["verify", "--suite", "no_such_check"]);
    assert_eq!(unknown.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"suite": ["bernoulli"], "typo_field": 1}"#).unwrap();
    assert_eq!(dplus(&["verify", "--config", bad.to_str().unwrap()]).status.code(), Some(2));

    std::fs::write(&bad, r#"{"twists": [{"p": 3, "dims": [0, 1, 2]}]}"#).unwrap();
    assert_eq!(dplus(&["verify", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}
