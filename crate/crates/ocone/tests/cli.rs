use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ocone").chain(args.iter().copied());
    let code = ocone::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = run(args);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}"));
    (code, v)
}

#[test]
fn reflect_prints_increments() {
    let (code, out, _) = run(&["reflect", "--path", "+++", "--level", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "++-");
    let (code, out, _) = run(&["reflect", "--path", "+0-", "--level", "5"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "+0-");
}

#[test]
fn solve_reports_a_verified_word() {
    let (code, v) = run_json(&["solve", "--s", "++++-", "--t", "-+--+"]);
    assert_eq!(code, 0);
    assert_eq!(v["verified"], true);
    assert_eq!(v["m"], 5);
    for letter in v["word"].as_array().unwrap() {
        assert!((0..=2).contains(&letter.as_i64().unwrap()));
    }
    assert_eq!(v["config"]["command"]["name"], "solve");
}

#[test]
fn counterexample_assertion_fails_with_witness() {
    let (code, v) = run_json(&[
        "counterexample",
        "1",
        "--m",
        "3",
        "--level",
        "2",
        "--assert-invariant",
    ]);
    assert_eq!(code, 1);
    let check = &v["checks"][0];
    assert_eq!(check["invariant"], false);
    assert_eq!(check["witness"]["path"], "++-");
    assert_eq!(check["witness"]["original"]["num"], "0");
    assert_eq!(check["witness"]["reflected"]["den"], "4");

    let (code, _) = run_json(&[
        "counterexample",
        "1",
        "--m",
        "3",
        "--level",
        "0",
        "--level",
        "1",
        "--assert-invariant",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn counterexample_writes_support_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ce2.csv");
    let (code, _) = run_json(&[
        "counterexample",
        "2",
        "--m",
        "7",
        "--support-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("path,num,den\n"));
    assert_eq!(text.lines().count(), 1 + 8);
}

#[test]
fn law_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for (format, name) in [("json", "law.json"), ("csv", "law.csv")] {
        let file = dir.path().join(name);
        let (code, _, err) = run(&[
            "--format",
            format,
            "--output",
            file.to_str().unwrap(),
            "law",
            "--process",
            "ce1",
            "--m",
            "4",
        ]);
        assert_eq!(code, 0, "{err}");
        let (code, a) = run_json(&["law", "--process", "ce1", "--m", "4"]);
        assert_eq!(code, 0);
        let (code, b) = run_json(&[
            "law",
            "--process",
            "table",
            "--m",
            "4",
            "--law-file",
            file.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert_eq!(a["law"], b["law"]);
        assert_eq!(b["law"].as_array().unwrap().len(), 8);
    }
}

#[test]
fn ocone_check_assertion() {
    let (code, v) = run_json(&[
        "ocone-check",
        "--process",
        "lazy-clock",
        "--m",
        "4",
        "--p",
        "1/3",
        "--assert-ocone",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["is_ocone"], true);
    let (code, v) = run_json(&[
        "ocone-check",
        "--process",
        "ce1",
        "--m",
        "4",
        "--assert-ocone",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["embedded_uniform"], false);
}

#[test]
fn discretize_reads_a_sampled_path() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("path.csv");
    std::fs::write(&file, "t,value\n0,0\n0.5,0.7\n1,-0.3\n").unwrap();
    let (code, v) = run_json(&[
        "discretize",
        "--input",
        file.to_str().unwrap(),
        "--mesh",
        "0.25",
    ]);
    assert_eq!(code, 0);
    let signs: Vec<i64> = v["jumps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|j| j["sign"].as_i64().unwrap())
        .collect();
    assert_eq!(signs, [1, 1, -1, -1, -1]);
    assert_eq!(v["sup_gap"]["within_bound"], true);
}

#[test]
fn reports_are_reproducible() {
    let args = [
        "--seed",
        "7",
        "test-reflect",
        "--spec",
        "bernoulli-walk",
        "--m",
        "5",
        "--level",
        "1",
        "--depth",
        "5",
        "--n",
        "3000",
    ];
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
    let (_, c, _) = run(&[
        "--seed", "8", "simulate", "--spec", "ce2", "--m", "7", "--n", "20",
    ]);
    let (_, d, _) = run(&[
        "--seed", "9", "simulate", "--spec", "ce2", "--m", "7", "--n", "20",
    ]);
    assert_ne!(c, d);
}

#[test]
fn seed_comes_from_the_environment() {
    let bin = env!("CARGO_BIN_EXE_ocone");
    let out = Command::new(bin)
        .env("OCONE_SEED", "42")
        .args(["simulate", "--spec", "ce1", "--m", "4", "--n", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 42);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["no-such-command"]).0, 2);
    assert_eq!(run(&["reflect", "--path", "+2+", "--level", "1"]).0, 2);
    assert_eq!(run(&["law", "--process", "table", "--m", "3"]).0, 2);
    let (code, _, err) = run(&["solve", "--s", "++", "--t", "+++"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
}
