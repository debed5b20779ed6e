use std::process::Command;

use resdiv_cli::builtins::{catalog, find};
use resdiv_cli::{parse, run_text, RunError};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_resdiv"))
}

fn run_with_report(args: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let status = bin().args(args).arg("--report").arg(&path).output().unwrap();
    let report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    (status.status.code().unwrap(), report)
}

#[test]
fn catalog_lists_the_named_instances() {
    let names: Vec<&str> = catalog().iter().map(|b| b.name).collect();
    assert!(!names.is_empty());
    assert!(names.contains(&"counterexample-one-third"));
    assert!(names.contains(&"koszul-two-generators-holomorphic"));
    assert!(find("counterexample-one-third").unwrap().tag.contains("1/|x|^(1/3)"));
    for b in catalog() {
        parse(b.text).unwrap_or_else(|e| panic!("{}: {e}", b.name));
    }
}

#[test]
fn serialization_is_idempotent_after_normalization() {
    for b in catalog() {
        let first = serde_json::to_string_pretty(&parse(b.text).unwrap()).unwrap();
        let second = serde_json::to_string_pretty(&parse(&first).unwrap()).unwrap();
        assert_eq!(first, second, "{}", b.name);
    }
}

#[test]
fn missing_task_points_at_task() {
    let text = r#"{"version": "resdiv/1", "n": 1}"#;
    match run_text(text, None) {
        Err(RunError::Input(e)) => assert_eq!(e.pointer, "/task"),
        other => panic!("{other:?}"),
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text).unwrap();
    let out = bin().arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/task"));
}

#[test]
fn nested_schema_errors_carry_their_path() {
    let text = r#"{"version": "resdiv/1", "task": "reproduce", "n": 1,
        "data": [[{"re": 1, "zexp": [0], "bogus": 1}]], "points": [[{"re": 0.1, "im": 0}]]}"#;
    let Err(RunError::Input(e)) = run_text(text, None) else { panic!() };
    assert!(e.pointer.starts_with("/data/0/0"), "{}", e.pointer);
    let text = r#"{"version": "resdiv/1", "task": "reproduce", "n": 2,
        "data": [[{"re": 1, "zexp": [0]}]], "points": [[{"re": 0.1, "im": 0}, {"re": 0, "im": 0}]]}"#;
    let Err(RunError::Input(e)) = run_text(text, None) else { panic!() };
    assert_eq!(e.pointer, "/data/0/0/zexp");
    let text = r#"{"version": "resdiv/0", "task": "reproduce", "n": 1}"#;
    let Err(RunError::Input(e)) = run_text(text, None) else { panic!() };
    assert_eq!(e.pointer, "/version");
}

#[test]
fn builtin_reproduction_passes() {
    let (code, report) = run_with_report(&["--builtin", "reproduce-disc"]);
    assert_eq!(code, 0);
    let check = &report["checks"][0];
    assert!(check["value"].as_f64().unwrap() <= 1e-8);
    assert_eq!(check["tolerance"].as_f64().unwrap(), 1e-8);
}

#[test]
fn failing_check_exits_one() {
    let mut problem: Value = serde_json::from_str(find("reproduce-disc").unwrap().text).unwrap();
    problem["tolerances"]["rel"] = Value::from(1e-30);
    let report = run_text(&problem.to_string(), None).unwrap();
    assert!(!report.pass);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn holomorphic_division_gives_quotient_one() {
    let (code, report) = run_with_report(&["--builtin", "koszul-two-generators-holomorphic"]);
    assert_eq!(code, 0);
    let points = report["results"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 9);
    for p in points {
        let psi = &p["psi"][0];
        let (re, im) = (psi["re"].as_f64().unwrap(), psi["im"].as_f64().unwrap());
        assert!((re - 1.0).hypot(im) <= 1e-3);
    }
}

#[test]
fn solver_failure_is_a_numeric_abort() {
    // base point outside the region where the weight is identically one
    let text = r#"{"version": "resdiv/1", "task": "divide", "n": 2, "level": 1,
        "complex": [[{"re": 1, "zexp": [1, 0]}], [{"re": 1, "zexp": [0, 1]}]],
        "data": [[{"re": -1, "zexp": [0, 1]}], [{"re": 1, "zexp": [1, 0]}]],
        "points": [[{"re": 0.9, "im": 0}, {"re": 0, "im": 0}]]}"#;
    let err = run_text(text, None).unwrap_err();
    assert!(matches!(err, RunError::Numeric { .. }), "{err:?}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let (_, one) = run_with_report(&["--builtin", "reproduce-ball-2d", "--threads", "1"]);
    let (_, four) = run_with_report(&["--builtin", "reproduce-ball-2d", "--threads", "4"]);
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timings");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(one), strip(four));
}

#[test]
fn membership_certificates_are_exact_strings() {
    let report = run_text(find("membership-monomial").unwrap().text, None).unwrap();
    assert!(report.pass);
    let cert = report.results["certificate"].as_array().unwrap();
    let text = serde_json::to_string(cert).unwrap();
    assert!(text.contains("\"1/3\""), "{text}");
}

#[test]
fn node_dump_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nodes.txt");
    let out = bin().args(["--builtin", "reproduce-disc", "--debug-nodes"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&path).unwrap().lines().count() > 100);
}
