//! End-to-end runs of the `dvlab` binary.

use std::path::Path;
use std::process::{Command, Output};

use dvlab_cli::ESTIMATE_COLUMNS;

fn dvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dvlab"))
        .args(args)
        .env_remove("DVLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

#[test]
fn passing_report_exits_zero_with_boolean_verdicts() {
    let out = dvlab(&["verify", "vrad", "--body", "lp:1:10", "--k", "1,2", "--samples", "2000", "--inner-samples", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["verdicts"]["identity/k=1"], serde_json::Value::Bool(true));
    assert_eq!(json["verdict_details"]["identity/k=1"]["hard"], serde_json::Value::Bool(true));
    assert!(json["command"].as_str().unwrap().starts_with("verify vrad --body lp:1:10"));
}

#[test]
fn usage_errors_exit_two_and_name_the_problem() {
    let out = dvlab(&["stats", "--body", "lp:0.5:10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p must be ≥ 1"));
    let out = dvlab(&["stats", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--samples"));
    let out = dvlab(&["stats", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_output_follows_documented_schema() {
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("sec.csv");
    let out = dvlab(&[
        "sections", "--body", "lp:inf:12", "--l", "2", "--subspaces", "4", "--restarts", "3", "--inner-samples", "200",
        "--out", main.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(&main), ["subspace_idx", "diameter", "inradius", "vrad_k", "flags"]);
    let rows = csv::Reader::from_path(&main).unwrap().records().count();
    assert_eq!(rows, 4);
    assert_eq!(header(&dir.path().join("sec.estimates.csv")), ESTIMATE_COLUMNS);
    assert!(!dir.path().join("sec.json").exists());

    // both: JSON next to the CSV files; multi-table reports get one file per table
    let base = dir.path().join("lower.json");
    let out = dvlab(&[
        "verify", "lower-inclusion", "--body", "lp:inf:32", "--l", "1,2", "--c", "0.5,1", "--subspaces", "5",
        "--samples", "2000", "--format", "both", "--out", base.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(base.exists());
    assert_eq!(header(&dir.path().join("lower.csv")), ["l", "c", "threshold", "fraction"]);
    assert_eq!(header(&dir.path().join("lower.estimates.csv")), ESTIMATE_COLUMNS);
}

#[test]
fn thread_count_does_not_change_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let path = dir.path().join(name);
        let out = dvlab(&[
            "verify", "transfer", "--body", "lp:inf", "--n", "8,16", "--samples", "40000", "--threads", threads,
            "--format", "both", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        path
    };
    let a = run("1", "a.json");
    let b = run("3", "b.json");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(a.with_extension("csv")).unwrap(), std::fs::read(b.with_extension("csv")).unwrap());
}

#[test]
fn env_var_sets_threads_and_argfiles_expand() {
    let dir = tempfile::tempdir().unwrap();
    let argfile = dir.path().join("args.txt");
    std::fs::write(&argfile, "moments --body lp:1.5:20\n--l 1,2 --k 1,3 --samples 3000\n").unwrap();
    let plain = dvlab(&["moments", "--body", "lp:1.5:20", "--l", "1,2", "--k", "1,3", "--samples", "3000"]);
    let from_file = Command::new(env!("CARGO_BIN_EXE_dvlab"))
        .arg(format!("@{}", argfile.display()))
        .env("DVLAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(plain.stdout, from_file.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_dvlab")).args(["moments"]).env("DVLAB_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
