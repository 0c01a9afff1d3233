mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use wssync::esql::parse_view;

fn wssync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wssync"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture() -> String {
    common::fixture_path().to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("wssync-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn load_reports_counts() {
    let o = wssync(&["load", &fixture()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "loaded 3 sources, 20 relations, 20 TCs, 11 JCs, 5 PCs, 3 web services, 6 views\n"
    );
}

#[test]
fn load_rejects_mistyped_join() {
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(common::fixture_path()).unwrap()).unwrap();
    doc["join_constraints"][0]["equalities"] = serde_json::json!([["Name", "Age"]]);
    let path = scratch("bad-jc.json", &doc.to_string());
    let o = wssync(&["load", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("join_constraints[0] (JC1)"), "{}", stderr(&o));
}

#[test]
fn load_missing_file() {
    let o = wssync(&["load", "/nonexistent/kb.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no such file"), "{}", stderr(&o));
}

#[test]
fn sync_doctor_name_deletion() {
    let o = wssync(&["sync", &fixture(), "delete-attribute", "S1.Doctor.Name"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("S2.Doctor D2 (RD=false, RR=true)"), "{out}");
    assert!(out.contains("AND (D.IdD = D2.IdD)"), "{out}");
    assert!(out.contains("web service WS1: synchronized, extent ≡"), "{out}");
}

#[test]
fn sync_hospital_deletion_as_one_argument() {
    let o = wssync(&["sync", &fixture(), "delete-relation S1.Hospital"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("FROM S2.Hospital H2 (RD=false, RR=true)"), "{out}");
    assert!(out.contains("view V2: rewritten, extent ⊆"), "{out}");
}

#[test]
fn sync_failure_exits_one() {
    let o = wssync(&["sync", &fixture(), "delete-relation", "S2.Patient"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("view V3: Web service can't be synchronized\n"), "{out}");
    assert!(
        out.contains("web service WS1: not synchronized, replace with WS3"),
        "{out}"
    );
}

#[test]
fn sync_json_output() {
    let o = wssync(&["--output", "json", "sync", &fixture(), "delete-relation", "S1.Hospital"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["views"][0]["id"], "V2");
    assert_eq!(v["views"][0]["extent"], "⊆");
    let text = v["views"][0]["definition"].as_str().unwrap();
    assert_eq!(parse_view(text).unwrap(), common::golden("v2_hospital.esql", "V2"));
}

#[test]
fn sync_usage_errors() {
    assert_eq!(
        wssync(&["sync", &fixture(), "drop-table", "S1.Doctor"]).status.code(),
        Some(2)
    );
    assert_eq!(
        wssync(&["sync", &fixture(), "delete-attribute", "S9.X.Y"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(wssync(&["sync", &fixture()]).status.code(), Some(2));
}

#[test]
fn sync_output_is_repeatable() {
    let args = ["sync", &fixture(), "delete-attribute", "S1.Doctor.Name"];
    assert_eq!(wssync(&args).stdout, wssync(&args).stdout);
}

#[test]
fn show_prints_canonical_views() {
    let o = wssync(&["show", &fixture(), "V1"]);
    assert_eq!(o.status.code(), Some(0));
    let kb = common::healthcare();
    assert_eq!(
        parse_view(&stdout(&o)).unwrap(),
        kb.wsvkb.view("V1").unwrap().definition
    );
    assert_eq!(wssync(&["show", &fixture(), "V9"]).status.code(), Some(2));
}

#[test]
fn validate_fixture() {
    let o = wssync(&["validate", &fixture()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "valid\n");
}

#[test]
fn fuzz_agrees() {
    let o = wssync(&["fuzz", "--trials", "1000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1000/1000 agree\n");
}

#[test]
fn fuzz_single_trial_is_reproducible() {
    let args = ["--output", "json", "fuzz", "--trials", "1", "--seed", "42"];
    let first = wssync(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, wssync(&args).stdout);
}

#[test]
fn fuzz_zero_trials_is_usage_error() {
    assert_eq!(wssync(&["fuzz", "--trials", "0"]).status.code(), Some(2));
}
