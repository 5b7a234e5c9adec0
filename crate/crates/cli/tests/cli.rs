//! End-to-end tests of the binary: command behaviour, exit codes, and
//! byte-stable reports.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wordforge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).expect("write temp file");
    path.to_str().expect("utf8 path").to_string()
}

#[test]
fn reduce_examples() {
    let out = run(&["reduce", "a a^-1 b"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "b\n");

    let out = run(&["reduce", "1"]);
    assert_eq!(stdout(&out), "1\n");

    let out = run(&["reduce", "y z1^-1 z1 z0"]);
    assert_eq!(stdout(&out), "y z0\n");
}

#[test]
fn reduce_rejects_unknown_generators() {
    let out = run(&["reduce", "--alphabet", "a b", "a q"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown generator"), "{err}");
}

#[test]
fn normalform_command() {
    let out = run(&[
        "normalform",
        "--factor0",
        "y g",
        "--factor1",
        "t0 t1 t",
        "1:t0 | 1:t0^-1 t1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1:t1\nlength: 1\n");
}

#[test]
fn fold_and_member() {
    let dir = tempfile::tempdir().unwrap();
    let gens = write(dir.path(), "gens.txt", "y\ny z1^-1 z0 z1\n");

    let out = run(&["fold", &gens]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("rank: 2"), "{text}");

    let out = run(&["member", &gens, "z0"]);
    assert_eq!(stdout(&out), "false\n");
    let out = run(&["member", &gens, "z1^-1 z0 z1"]);
    assert_eq!(stdout(&out), "true\n");

    let empty = write(dir.path(), "empty.txt", "");
    let out = run(&["fold", &empty, "--alphabet", "a"]);
    assert!(stdout(&out).contains("rank: 0"));

    let single = write(dir.path(), "single.txt", "a\n");
    let out = run(&["fold", &single]);
    assert!(stdout(&out).contains("rank: 1"));

    let out = run(&["fold", &single, "--dot"]);
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph core {"));
    assert!(dot.contains("doublecircle"));
}

#[test]
fn verify_construction_pass_fail_and_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", r#"{"x": [], "y": ["y"], "N": 1}"#);

    let out = run(&["verify-construction", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["pass"], true);
    assert!(report["reports"].as_array().unwrap().len() >= 5);

    let out = run(&["verify-construction", &spec, "--sabotage", "t0=y"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], false);
    let failing: Vec<&serde_json::Value> = report["reports"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == false)
        .collect();
    assert!(!failing.is_empty());
    for r in failing {
        assert!(
            !r["witnesses"].as_object().unwrap().is_empty(),
            "failure without witness: {r}"
        );
    }

    let bad = write(dir.path(), "bad.json", r#"{"x": []}"#);
    let out = run(&["verify-construction", &bad]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "verify-construction",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "scenario.json",
        r#"{"factor0": ["y","g"], "factor1": ["t0","t1","t"], "y": "y", "t0": "t0", "t1": "t1"}"#,
    );

    let out = run(&[
        "search-lemma4",
        &scenario,
        "--syllables",
        "2",
        "--syllable-len",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["absent"], true);
    assert_eq!(report["candidates"], 58);

    let out = run(&[
        "search-lemma4",
        &scenario,
        "--syllables",
        "3",
        "--disable-c1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["witness"]["z1"], "0:g | 1:t0^-1 | 0:y");
    assert_eq!(report["witness"]["verdict"]["inequality_holds"], false);

    let out = run(&[
        "search-lemma4",
        &scenario,
        "--syllables",
        "6",
        "--max-candidates",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_pass_and_plan_error() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write(
        dir.path(),
        "plan.json",
        r#"{"r0": 3, "stages": [{"kind":"nonE"}, {"kind":"E", "split":{"y":["g1"],"t":["g2","g3"]}}, {"kind":"limit"}]}"#,
    );
    let out = run(&["simulate", &plan, "--samples", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["trace"]["stages"].as_array().unwrap().len(), 4);

    let bad = write(
        dir.path(),
        "bad_plan.json",
        r#"{"r0": 2, "stages": [{"kind":"E", "split":{"y":[],"t":["g2"]}}]}"#,
    );
    let out = run(&["simulate", &bad]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"x": ["x0"], "y": ["y"], "N": 3}"#,
    );
    let a = run(&["verify-construction", &spec, "--seed", "7"]);
    let b = run(&["verify-construction", &spec, "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);

    let scenario = write(
        dir.path(),
        "scenario.json",
        r#"{"factor0": ["y","g"], "factor1": ["t0","t1","t"], "y": "y", "t0": "t0", "t1": "t1"}"#,
    );
    let a = run(&["search-lemma4", &scenario, "--syllables", "4"]);
    let b = run(&["search-lemma4", &scenario, "--syllables", "4"]);
    assert_eq!(a.stdout, b.stdout);

    let plan = write(
        dir.path(),
        "plan.json",
        r#"{"r0": 2, "stages": [{"kind":"nonE"}, {"kind":"E", "split":{"y":["g1"],"t":["g3"]}}]}"#,
    );
    let a = run(&["simulate", &plan, "--samples", "30", "--seed", "5"]);
    let b = run(&["simulate", &plan, "--samples", "30", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);

    // a single worker thread must produce the identical report
    let c = bin()
        .args(["search-lemma4", &scenario, "--syllables", "4"])
        .env("WORDFORGE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a_search_bytes(&scenario), c.stdout);
}

fn a_search_bytes(scenario: &str) -> Vec<u8> {
    run(&["search-lemma4", scenario, "--syllables", "4"]).stdout
}

#[test]
fn out_flag_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", r#"{"x": [], "y": ["y"], "N": 1}"#);
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "verify-construction",
        &spec,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let content = std::fs::read_to_string(&out_path).unwrap();
    let report: serde_json::Value = serde_json::from_str(&content).unwrap();
    assert_eq!(report["command"], "verify-construction");
}
