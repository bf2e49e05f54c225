use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn relfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relfree")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn witness_then_verify_roundtrip() {
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("c.json");
    let out = relfree(&["witness", "--m", "0", "--H", "S", "--q", "1", "--out", path_str(&cert)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("c.json"));

    let out = relfree(&["verify", path_str(&cert), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let checks = json(&out)["checks"].as_array().unwrap().clone();
    assert!(checks.iter().all(|c| c["ok"] == Value::Bool(true)));
}

#[test]
fn tampered_certificate_fails_with_property_code() {
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("c.json");
    assert_eq!(code(&relfree(&["witness", "--H", "R", "--q", "1", "--out", path_str(&cert)])), 0);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    v["stability_round"] = Value::from(3);
    std::fs::write(&cert, v.to_string()).unwrap();
    assert_eq!(code(&relfree(&["verify", path_str(&cert)])), 3);
}

#[test]
fn malformed_certificate_is_input_error() {
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("bad.json");
    std::fs::write(&cert, "{\"version\": 1}").unwrap();
    assert_eq!(code(&relfree(&["verify", path_str(&cert)])), 1);
}

#[test]
fn atomic_case_is_refused() {
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("c.json");
    let out = relfree(&["witness", "--m", "0", "--H", "RS", "--q", "1", "--out", path_str(&cert)]);
    assert_eq!(code(&out), 1);
    assert!(!cert.exists());
}

#[test]
fn graph_budget_exit_code() {
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("c.json");
    let out = relfree(&["witness", "--H", "S", "--q", "2", "--budget", "20", "--out", path_str(&cert)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn dot_output_is_a_digraph() {
    let dir = TempDir::new().unwrap();
    let dot = dir.path().join("g.dot");
    let out = relfree(&["witness", "--H", "R", "--q", "1", "--format", "dot", "--out", path_str(&dot)]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.trim_end().ends_with('}'));
}

#[test]
fn search_then_eval() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.json");
    let out = relfree(&["search", "--term=(0';0') . 1'", "--m", "0", "--H", "RS", "--out", path_str(&model)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("base 2"));

    let out = relfree(&["eval", "--term=0'", "--model", path_str(&model), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["config"]["base"], 2);
    assert_eq!(v["edges"].as_array().unwrap().len(), 2);
}

#[test]
fn search_without_model_reports_not_found() {
    let out = relfree(&["search", "--term=0", "--m", "0", "--H", "RS", "--max-base", "2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["found"], Value::Bool(false));
}

#[test]
fn dnf_counts_and_budget() {
    let out = relfree(&["dnf", "--term", "x0", "--m", "1", "--H", "RS"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["count"], 2);
    assert_eq!(v["config"]["signature"]["m"], 1);

    let out = relfree(&["dnf", "--term", "x0", "--m", "1", "--H", "RS", "--budget", "3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn input_errors() {
    assert_eq!(code(&relfree(&["dnf", "--term", "(", "--m", "0"])), 1);
    assert_eq!(code(&relfree(&["dnf", "--term", "x3", "--m", "1"])), 1);
    assert_eq!(code(&relfree(&["dnf", "--term", "1", "--H", "Q"])), 1);
    assert_eq!(code(&relfree(&["eval", "--bogus"])), 1);
    assert_eq!(code(&relfree(&["eval", "--term", "1", "--model", "/nonexistent/m.json"])), 1);
    assert_eq!(code(&relfree(&["--help"])), 0);
}

#[test]
fn free0_tables_and_verification() {
    let out = relfree(&["free0", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["tables"].is_object());

    let out = relfree(&["free0", "--verify", "--max-base", "3", "--random-units", "20", "--format", "json"]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["config"]["max_base"], 3);
}

#[test]
fn partition_reports_no_failures() {
    let out = relfree(&["partition", "--m", "1", "--H", "R", "--models", "4", "--max-base", "3", "--degree", "2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["checks"], 12);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
    assert_eq!(v["config"]["rng_seed"], 0x5eed);
}
