use std::process::Command;

use ethiplan_cli::{run, EXIT_NO_PLAN, EXIT_OK, EXIT_USAGE};

const DOMAIN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/robot_and_frank.dom");
const PROBLEM: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/robot_and_frank.prob");

fn ethiplan(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["ethiplan"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn with_inputs<'a>(cmd: &'a str, rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd, "-d", DOMAIN, "-p", PROBLEM];
    v.extend_from_slice(rest);
    v
}

#[test]
fn plan_matches_golden_output() {
    let (code, out, _) = ethiplan(&with_inputs("plan", &[]));
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, include_str!("golden/plan.txt"));
}

#[test]
fn plan_json_lists_steps_and_cost() {
    let (_, out, _) = ethiplan(&with_inputs("plan", &["--json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v, serde_json::json!({"steps": ["lie_frank", "exercise"], "cost": 2}));
}

#[test]
fn max_utility_objective_is_accepted() {
    let (code, out, _) = ethiplan(&with_inputs("plan", &["--objective", "max-utility"]));
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "lie_frank; exercise (cost 2)\n");
}

#[test]
fn unknown_principle_is_a_usage_error() {
    let (code, _, err) = ethiplan(&with_inputs("evaluate", &["--principle", "kantian"]));
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("kantian"), "{err}");
}

#[test]
fn missing_subcommand_and_bad_flags_are_usage_errors() {
    assert_eq!(ethiplan(&[]).0, EXIT_USAGE);
    assert_eq!(ethiplan(&with_inputs("plan", &["--max-depth", "zero"])).0, EXIT_USAGE);
    assert_eq!(ethiplan(&with_inputs("plan", &["--max-depth", "0"])).0, EXIT_USAGE);
    assert_eq!(ethiplan(&["plan", "-d", "/no/such.dom", "-p", PROBLEM]).0, EXIT_USAGE);
    let (code, out, _) = ethiplan(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("explain"));
}

#[test]
fn evaluate_names_the_decisive_reason() {
    let (code, out, _) = ethiplan(&with_inputs("evaluate", &["--principle", "deontology"]));
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("impermissible under deontology"), "{out}");
    assert!(out.contains("sufficient and necessary: Bad(lie_frank)"), "{out}");
}

#[test]
fn imported_plan_is_used() {
    let (code, out, _) = ethiplan(&with_inputs(
        "evaluate",
        &["--principle", "deontology", "--plan", "beg_frank; exercise"],
    ));
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("permissible under deontology"), "{out}");
    let (code, _, err) = ethiplan(&with_inputs("plan", &["--plan", "exercise"]));
    assert_eq!(code, EXIT_USAGE, "{err}");
}

#[test]
fn unreachable_suggestion_exits_with_2() {
    let (code, _, err) = ethiplan(&with_inputs(
        "explain",
        &["--suggest", "forbid exercise", "--principle", "deontology"],
    ));
    assert_eq!(code, EXIT_NO_PLAN);
    assert!(err.contains("forbid exercise"), "{err}");
}

#[test]
fn malformed_suggestion_is_a_usage_error() {
    let (code, _, _) = ethiplan(&with_inputs("explain", &["--suggest", "be nice", "--principle", "deontology"]));
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = ethiplan(&with_inputs("explain", &["--suggest", "forbid fly", "--principle", "deontology"]));
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ethiplan");
    let ok = Command::new(bin).args(with_inputs("plan", &[])).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "lie_frank; exercise (cost 2)\n");
    let bad = Command::new(bin).args(["evaluate", "--principle", "nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}
