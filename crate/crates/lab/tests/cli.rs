use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal-lab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

const K3_OP: &str = r#"{"graph": {"n": 3, "edges": [[0,1],[1,2],[0,2]]}, "diag": [0, 100, 200],
  "offdiag": [{"edge": [0,1], "re": -1, "im": 0}, {"edge": [1,2], "re": -1, "im": 0}, {"edge": [0,2], "re": -1, "im": 0}]}"#;

#[test]
fn spectrum_and_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "k3.json", K3_OP);
    let out = lab(d, &["spectrum", "--op", "k3.json", "--out", "s.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = read_json(d, "s.json");
    assert_eq!(rec["schema_version"], 1);
    assert_eq!(rec["results"]["beta"], 1);
    assert_eq!(rec["results"]["eigenvalues"].as_array().unwrap().len(), 3);

    let out = lab(d, &["avg-dist", "--op", "k3.json", "--format", "csv", "--out", "avg.csv"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(d.join("avg.csv")).unwrap();
    assert!(csv.starts_with("schema_version,s,count,probability\n"));
    assert!(csv.contains("1,0,12,0.5") && csv.contains("1,1,12,0.5"), "{csv}");
    let rec = read_json(d, "avg.json");
    assert_eq!(rec["results"]["exactly_binomial"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("symmetric: true"));
}

#[test]
fn results_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "k3.json", K3_OP);
    for name in ["a.json", "b.json"] {
        let out =
            lab(d, &["critical-scan", "--op", "k3.json", "--k", "2", "--seed", "7", "--starts", "16", "--out", name]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = read_json(d, "a.json");
    let b = read_json(d, "b.json");
    assert_eq!(serde_json::to_string(&a["results"]).unwrap(), serde_json::to_string(&b["results"]).unwrap());
    assert_eq!(a["results"]["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "bad.json", r#"{"n": 3, "edges": [[0,1]], "extra": true}"#);
    assert_eq!(lab(d, &["spectrum", "--graph", "bad.json"]).status.code(), Some(3));
    assert_eq!(lab(d, &["spectrum", "--graph", "missing.json"]).status.code(), Some(3));
    // equal diagonals make several eigenvalues of K4 degenerate
    write(d, "k4.json", r#"{"n": 4, "edges": [[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]]}"#);
    assert_eq!(lab(d, &["avg-dist", "--graph", "k4.json"]).status.code(), Some(2));
    assert_eq!(lab(d, &["avg-dist", "--graph", "k4.json", "--skip-inadmissible"]).status.code(), Some(0));
    assert_eq!(lab(d, &["avg-dist", "--graph", "k4.json", "--cap", "4"]).status.code(), Some(4));
    write(d, "k3.json", K3_OP);
    assert_eq!(lab(d, &["critical-scan", "--op", "k3.json"]).status.code(), Some(2));
    assert_eq!(lab(d, &["spectrum", "--op", "k3.json", "--graph", "k4.json"]).status.code(), Some(3));
}

#[test]
fn verify_index_on_k3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "k3.json", K3_OP);
    let out = lab(d, &["verify-index", "--op", "k3.json", "--out", "v.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_json(d, "v.json")["results"]["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["status"] == "agree" && r["index"] == r["surplus"]));
}

#[test]
fn linkage_fixture_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = lab(d, &["linkage-analyze", "--emit-fixture", "d=4", "--seed", "11", "--out", "fx.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let k = read_json(d, "fx.record.json")["results"]["k"].as_u64().unwrap().to_string();
    let out =
        lab(d, &["linkage-analyze", "--op", "fx.json", "--alpha", "fx.alpha.json", "--k", &k, "--out", "an.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = read_json(d, "an.json");
    assert_eq!(rec["results"]["hessian_matches_prediction"], true);
    assert_eq!(rec["results"]["analysis"]["manifold_dimension"], 1);
}

#[test]
fn transversality_after_landing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let op = r#"{"graph": {"n": 4, "edges": [[0,2],[0,3],[1,2],[1,3],[2,3]]}, "diag": [0.1, 0.5, 0.7, 0.2],
      "offdiag": [{"edge": [0,2], "re": 0.3, "im": 0.9}, {"edge": [0,3], "re": -1, "im": 0.2},
                  {"edge": [1,2], "re": 0.8, "im": -0.4}, {"edge": [1,3], "re": 0.5, "im": 0.5},
                  {"edge": [2,3], "re": -0.7, "im": 0.1}]}"#;
    write(d, "h.json", op);
    let out = lab(d, &["transversality-check", "--op", "h.json", "--k", "2", "--land", "--out", "t.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = read_json(d, "t.json");
    assert_eq!(rec["results"]["verdict"]["multiplicity"], 2);
    assert_eq!(rec["results"]["criteria_agree"], true);
    assert_eq!(rec["results"]["transverse"], true);
}
