use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bubbletk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn bubbletk")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is json")
}

#[test]
fn construct_then_verify_gram() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "tri.json");
    let out = run(&["construct", "--mode", "equal", "--n", "2", "--q", "3", "-o", &file]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--in", &file, "--checks", "gram,stationarity"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn curvature_mode_with_negative_values() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "c.json");
    let out = run(&["construct", "--mode", "curv", "--n", "3", "--q", "4", "--curvatures", "-0.4,0.1,0.1,0.2", "-o", &file]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["verify", "--in", &file, "--checks", "gram,jacobi"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn enumerate_min_degree_three_on_five_vertices() {
    let out = run(&["graph", "enumerate", "--q", "5", "--filter", "min_degree_3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["count"], 3);
    let dot = run(&["graph", "enumerate", "--q", "5", "--filter", "min_degree_3"]);
    let text = String::from_utf8(dot.stdout).unwrap();
    assert_eq!(text.matches("graph g").count(), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "c.json");
    run(&["construct", "--mode", "curv", "--n", "2", "--q", "3", "--curvatures", "0.5,-0.2,-0.3", "-o", &file]);
    let args = ["measure", "--in", &file, "--samples", "20000", "--volume-samples", "50000", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["seed"], 11);
    let csv = run(&["measure", "--in", &file, "--samples", "20000", "--volume-samples", "50000", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("quantity,i,j,value,std_error,samples,seed\n"));
    assert_eq!(text.lines().count(), 1 + 3 + 3 + 1);
}

#[test]
fn euclidean_triple_bubble_slice_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "tri.json");
    run(&["construct", "--mode", "equal", "--n", "2", "--q", "3", "-o", &file]);
    let out = run(&["plot", "--in", &file, "--mode", "euclidean"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.starts_with(b"<svg"));
    let digest = Sha256::digest(&out.stdout);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hex, "ef7933e101c21a0b5c54d4be4129a339b53c72580eef46b5110347358cde16ed");
}

#[test]
fn input_errors_exit_two_with_codes() {
    let out = run(&["construct", "--mode", "curv", "--n", "2", "--q", "3", "--curvatures", "0.5,-0.2,0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "E_ZERO_SUM");

    let out = run(&["construct", "--mode", "equal", "--n", "2", "--q", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "E_CELL_COUNT");

    let out = run(&["graph", "enumerate", "--q", "9"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["verify", "--in", "/nonexistent/cluster.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "E_IO");

    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "E_USAGE");
}

#[test]
fn malformed_cluster_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "bad.json");
    std::fs::write(&file, r#"{"space":"S","n":2,"q":3,"centers":[[1,0,0]],"curvatures":[0,0,0],"extra":1}"#).unwrap();
    let out = run(&["verify", "--in", &file]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "E_SCHEMA");
}

#[test]
fn failed_check_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "tri.json");
    run(&["construct", "--mode", "equal", "--n", "2", "--q", "3", "-o", &file]);
    let boosted = path(dir.path(), "boosted.json");
    let out = run(&["transform", "--in", &file, "--boost", "0.3,-0.4,0.2", "--t", "0.8", "-o", &boosted]);
    assert_eq!(out.status.code(), Some(0));
    let mut cluster: Value = serde_json::from_str(&std::fs::read_to_string(&boosted).unwrap()).unwrap();
    cluster["centers"][0][0] = Value::from(cluster["centers"][0][0].as_f64().unwrap() + 0.05);
    cluster["centers"][1][0] = Value::from(cluster["centers"][1][0].as_f64().unwrap() - 0.05);
    std::fs::write(&boosted, cluster.to_string()).unwrap();
    let out = run(&["verify", "--in", &boosted, "--checks", "gram"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["failed"][0], "gram");
}

#[test]
fn blowup_and_ring_test_report() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "tri.json");
    run(&["construct", "--mode", "equal", "--n", "2", "--q", "3", "-o", &file]);
    let out = run(&["blowup", "--in", &file, "--point", "0,0,1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cone: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cone["cells"].as_array().unwrap().len(), 3);

    let out = run(&["ring-test", "--q", "5", "--curvatures", "1,1,1,1"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["report"]["verdict"], "infeasible");
    let alias = run(&["graph", "ring-test", "--q", "5", "--curvatures", "1,1,1,1"]);
    assert_eq!(out.stdout, alias.stdout);
}
