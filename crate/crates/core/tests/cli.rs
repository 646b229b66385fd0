use std::path::Path;
use std::process::{Command, Output};

use maxvar::grid::io::{read, GridFile};
use maxvar::grid::{variation_coarea, Domain};

fn maxvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxvar")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn variation_matches_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let (e, m) = (dir.path().join("E.json"), dir.path().join("M.json"));
    assert!(maxvar(&["gen", "--shape", "ball:0.25", "--n", "128", "--h", "auto", "--out", s(&e)]).status.success());
    let out = maxvar(&["maximal", "--op", "uncentered", "--schedule", "geom:1.05", "--in", s(&e), "--out", s(&m)]);
    assert!(out.status.success());
    let printed: f64 = String::from_utf8(maxvar(&["variation", "--in", s(&m)]).stdout).unwrap().trim().parse().unwrap();
    let GridFile::Field(field) = read(&m).unwrap() else { panic!("expected a field") };
    assert_eq!(printed, variation_coarea(&field, &Domain::FreeSpace).unwrap());
}

#[test]
fn usage_errors_go_to_stderr_with_exit_2() {
    for args in [&["transmogrify"][..], &["gen", "--shape", "ball:0.2"], &["verify", "-s", "all"], &[]] {
        let out = maxvar(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"), "{args:?}");
    }
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = maxvar(&["variation", "--in", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = maxvar(&["gen", "--shape", "ball:0.6", "--n", "32", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn verify_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let csv = dir.path().join("a.csv");
    let strip = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v["report"].as_object_mut().unwrap().remove("timing");
        v
    };
    let args = ["verify", "--suite", "all", "--seed", "42", "--report", s(&a), "--csv", s(&csv)];
    assert_eq!(maxvar(&args).status.code(), Some(0));
    let (first, first_csv) = (strip(&a), std::fs::read(&csv).unwrap());
    assert_eq!(maxvar(&args).status.code(), Some(0));
    assert_eq!(strip(&a), first);
    assert_eq!(std::fs::read(&csv).unwrap(), first_csv);
    assert_eq!(first["config"]["command"], "verify");
    assert_eq!(first["report"]["records"].as_array().unwrap().len(), maxvar::experiments::lemma_names().len());
    // header plus one row per lemma
    assert_eq!(String::from_utf8(first_csv).unwrap().lines().count(), 1 + maxvar::experiments::lemma_names().len());
}

#[test]
fn single_lemma_and_empty_budget() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.json");
    assert_eq!(maxvar(&["verify", "--suite", "vitali", "--report", s(&r)]).status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    assert_eq!(v["report"]["records"].as_array().unwrap().len(), 1);
    assert_eq!(maxvar(&["verify", "--budget", "0", "--report", s(&r)]).status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    assert!(v["report"]["records"].as_array().unwrap().is_empty());
    assert_eq!(maxvar(&["verify", "--suite", "no_such_lemma"]).status.code(), Some(2));
}

#[test]
fn levelset_and_cover_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let e = dir.path().join("E.json");
    assert!(maxvar(&["gen", "--shape", "balls:5", "--n", "64", "--seed", "3", "--out", s(&e)]).status.success());
    let r = dir.path().join("r.json");
    for args in [
        &["levelset", "--in", s(&e), "--lambdas", "log:0.01,0.5,8", "--out", s(&r)][..],
        &["cover", "--in", s(&e), "--lambda", "0.3", "--balls", "10", "--report", s(&r)],
    ] {
        assert_eq!(maxvar(args).status.code(), Some(0), "{args:?}");
        let first = std::fs::read(&r).unwrap();
        assert_eq!(maxvar(args).status.code(), Some(0), "{args:?}");
        assert_eq!(std::fs::read(&r).unwrap(), first, "{args:?}");
    }
}

#[test]
fn envelope_regen_writes_only_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let out = maxvar(&["experiment", "--kind", "corpus", "--n", "32", "--golden-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2), "no golden file yet");
    assert!(!dir.path().join("envelopes.json").exists());
}
