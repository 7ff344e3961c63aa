use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn dro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dro"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs a command expected to succeed and parses its JSON report.
fn report(args: &[&str]) -> Value {
    let out = dro(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn fs(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(f).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

fn all_close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y))
}

#[test]
fn static_vertex_scan() {
    let r = report(&[
        "eval-static",
        &data("static_family.json"),
        "--variable",
        "Z",
        "--set",
        "vertices",
    ]);
    assert!(close(f(&r["results"]["value"]), 5.0));
    assert!(all_close(&fs(&r["results"]["argmax"]), &[0.0, 1.0]));
}

#[test]
fn static_zero_radius_ball_pins_center() {
    let file = data("static_wasserstein.json");
    let r = report(&["eval-static", &file, "--variable", "Z", "--set", "pinned"]);
    assert!(close(f(&r["results"]["value"]), 1.0));
    // radius 0.25 moves a quarter of the mass across distance 1
    let r = report(&["eval-static", &file, "--variable", "Z", "--set", "loose"]);
    assert!(close(f(&r["results"]["value"]), 0.75 + 0.25 * 9.0));
}

#[test]
fn static_mean_constraint_uses_endpoints() {
    let r = report(&[
        "eval-static",
        &data("static_moment.json"),
        "--variable",
        "square",
        "--set",
        "mean",
    ]);
    assert!(close(f(&r["results"]["value"]), 0.3));
    assert!(all_close(&fs(&r["results"]["argmax"]), &[0.7, 0.0, 0.3]));
}

#[test]
fn unknown_name_is_an_input_error() {
    let out = dro(&[
        "eval-static",
        &data("static_family.json"),
        "--variable",
        "Y",
        "--set",
        "vertices",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown variable 'Y'"));
}

#[test]
fn malformed_json_reports_line() {
    let dir = std::env::temp_dir().join(format!("dro-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\n  \"version\": \"1\",\n  \"spaces\": {,\n}\n").unwrap();
    let out = dro(&[
        "eval-static",
        path.to_str().unwrap(),
        "--variable",
        "Z",
        "--set",
        "M",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("schema error") && err.contains("line 3"),
        "{err}"
    );
}

fn conditional(set: &str, extra: &[&str]) -> Value {
    let file = data("conditional.json");
    let mut args = vec![
        "eval-conditional",
        &file,
        "--variable",
        "Z",
        "--set",
        set,
        "--partition",
        "halves",
    ];
    args.extend_from_slice(extra);
    report(&args)
}

#[test]
fn conditional_atom_maxima() {
    for set in ["simplex", "avar_half"] {
        let r = conditional(set, &[]);
        assert!(
            all_close(&fs(&r["results"]["per_atom"]), &[5.0, 7.0]),
            "{set}"
        );
        assert!(
            all_close(&fs(&r["results"]["values"]), &[5.0, 5.0, 7.0, 7.0]),
            "{set}"
        );
        assert_eq!(r["results"]["property_p"], true);
        assert_eq!(r["results"]["te_holds"], true);
    }
}

#[test]
fn conditional_singleton_is_conditional_mean() {
    let r = conditional("single", &[]);
    assert!(all_close(&fs(&r["results"]["per_atom"]), &[3.0, 4.5]));
    assert_eq!(r["results"]["property_p"], false);
}

#[test]
fn unreachable_atom_prints_minus_inf() {
    let r = conditional("front_only", &[]);
    assert_eq!(r["results"]["per_atom"][1], "-inf");
    assert!(close(f(&r["results"]["per_atom"][0]), 5.0));
    assert_eq!(r["results"]["te_holds"], false);
    assert!(!r["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn nested_avar_flag_changes_the_answer() {
    let plain = conditional("avar_low", &[]);
    let nested = conditional("avar_low", &["--nested-avar"]);
    assert!(all_close(&fs(&plain["results"]["per_atom"]), &[5.0, 7.0]));
    // AVaR at 0.3 of the two-point uniform law on {1, 5}: (0.2 * 1 + 0.5 * 5) / 0.7
    assert!(all_close(
        &fs(&nested["results"]["per_atom"]),
        &[27.0 / 7.0, 39.0 / 7.0]
    ));
    assert_eq!(nested["results"]["mode"], "nested_avar");
    let half = conditional("avar_half", &["--nested-avar"]);
    assert!(all_close(&fs(&half["results"]["per_atom"]), &[5.0, 7.0]));
}

#[test]
fn nested_avar_needs_avar_set() {
    let file = data("conditional.json");
    let out = dro(&[
        "eval-conditional",
        &file,
        "--variable",
        "Z",
        "--set",
        "simplex",
        "--partition",
        "halves",
        "--nested-avar",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn composite(variable: &str, spec: &str, extra: &[&str]) -> Value {
    let file = data("composite.json");
    let mut args = vec![
        "eval-composite",
        &file,
        "--variable",
        variable,
        "--spec",
        spec,
    ];
    args.extend_from_slice(extra);
    report(&args)
}

#[test]
fn composite_fold_over_simplex() {
    let r = composite("Z", "simplex_fold", &[]);
    assert!(close(f(&r["results"]["value"]), 7.0));
    assert!(all_close(
        &fs(&r["results"]["stage_values"][1]),
        &[5.0, 5.0, 7.0, 7.0]
    ));
}

#[test]
fn composite_fold_of_singleton_is_expectation() {
    let r = composite("Z", "single_fold", &[]);
    assert!(close(f(&r["results"]["value"]), 15.0 / 4.0));
    assert!(close(f(&r["results"]["static_value"]), 15.0 / 4.0));
}

#[test]
fn rectangular_avar_tables() {
    let r = composite("ladder", "avar_pair", &[]);
    assert!(all_close(&fs(&r["results"]["tables"][1]), &[2.0, 4.0]));
    assert!(close(f(&r["results"]["value"]), 4.0));
    assert!(close(f(&r["results"]["composite_value"]), 4.0));
}

#[test]
fn rectangular_gap_and_induced_family() {
    let r = composite("diagonal", "gap", &["--induced-set"]);
    assert!(close(f(&r["results"]["value"]), 1.0));
    assert!(close(f(&r["results"]["static_value"]), 0.5));
    let ind = &r["results"]["induced_set"];
    assert!(close(f(&ind["max_expectation"]), 1.0));
    assert!(close(f(&ind["family1_max"]), 0.5));
}

#[test]
fn induced_set_count_before_dedup() {
    let r = composite("ladder", "counting", &["--induced-set"]);
    let ind = &r["results"]["induced_set"];
    // m1 * m2^n with m1 = 2, m2 = 3, n = 2
    assert_eq!(ind["pre_dedup_count"], 18);
    assert_eq!(ind["family1"], 6);
    let distinct = ind["distinct"].as_u64().unwrap();
    assert!((6..=18).contains(&distinct));
}

#[test]
fn induced_set_cap() {
    let file = data("composite.json");
    let out = dro(&[
        "eval-composite",
        &file,
        "--variable",
        "wide",
        "--spec",
        "huge",
        "--induced-set",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds cap"));
}

#[test]
fn solve_guessing_problem() {
    let r = report(&[
        "solve",
        &data("dp.json"),
        "--problem",
        "guess",
        "--enumerate",
    ]);
    let res = &r["results"];
    assert!(close(f(&res["value"]), 1.0));
    assert!(close(f(&res["enumeration"]["enumerated_min"]), 1.0));
    assert!(close(f(&res["enumeration"]["min_static"]), 0.55));
    assert_eq!(res["enumeration"]["argmins_differ"], true);
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn solve_hedging_problem() {
    // action 0: cost 1 then min per outcome [0, 1], worst coin 0.5 -> 1.5
    // action 1: cost 0 then forced [3, 1], worst coin 0.8 -> 2.6
    let r = report(&["solve", &data("dp.json"), "--problem", "hedge"]);
    let res = &r["results"];
    assert!(close(f(&res["value"]), 1.5));
    assert!(all_close(&fs(&res["cost_to_go"][0]), &[0.5, 2.6]));
    assert_eq!(res["policy"], serde_json::json!([[0], [0, 1]]));
}

#[test]
fn infeasible_node_rejected_on_load() {
    let out = dro(&["solve", &data("dp_infeasible.json"), "--problem", "stuck"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no feasible action"));
}

#[test]
fn wasserstein_examples() {
    let file = data("transport.json");
    let w = |a: &str, b: &str| report(&["wasserstein", &file, "--from", a, "--to", b]);
    assert!(close(f(&w("zero", "one")["results"]["distance"]), 1.0));
    assert!(close(f(&w("half", "zero")["results"]["distance"]), 0.5));
    let same = w("half", "half");
    assert!(close(f(&same["results"]["distance"]), 0.0));
    assert!(all_close(&fs(&same["results"]["plan"][0]), &[0.5, 0.0]));
    assert!(all_close(&fs(&same["results"]["plan"][1]), &[0.0, 0.5]));
}

#[test]
fn bound_formula() {
    let r = report(&["bounds", &data("transport.json"), "--bound", "formula"]);
    assert!(close(f(&r["results"]["bound"]), 0.35));
}

#[test]
fn stagewise_independent_bound_is_tight_here() {
    // stage 2: 0.5 + 0.2, stage 1: 0.5 + 0.1; nested 1.3 against mean 1
    let r = report(&["bounds", &data("transport.json"), "--bound", "independent"]);
    assert!(close(f(&r["results"]["bound"]), 0.3));
    assert!(close(f(&r["results"]["empirical"]["gap"]), 0.3));
}

#[test]
fn bounds_csv_sweep() {
    let out = dro(&[
        "bounds",
        &data("transport.json"),
        "--bound",
        "sweep",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("epsilon,gap,bound,holds"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[3] == "true"));
    assert_eq!(rows[0][1], "0.0");
    // radius 4 is the diameter: all mass reaches the maximum 2, mean 0.65
    let last: f64 = rows[5][1].parse().unwrap();
    assert!(close(last, 2.0 - 0.65));
}

#[test]
fn csv_without_table_is_an_error() {
    let out = dro(&[
        "eval-static",
        &data("static_family.json"),
        "--variable",
        "Z",
        "--set",
        "vertices",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn metric_violation_rejected_on_load() {
    let out = dro(&["verify", &data("bad_metric.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("triangle"));
}

#[test]
fn verify_shipped_files() {
    for name in [
        "static_family.json",
        "static_wasserstein.json",
        "static_moment.json",
        "conditional.json",
        "composite.json",
        "dp.json",
        "transport.json",
    ] {
        let r = report(&["verify", &data(name)]);
        assert!(!r["checks"].as_array().unwrap().is_empty(), "{name}");
    }
}

#[test]
fn verify_builtin_passes() {
    let r = report(&["verify", "--builtin"]);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 12);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_other_seed_same_outcome() {
    let a = report(&[
        "verify",
        "--builtin",
        "--seed",
        "7",
        "--criterion",
        "1",
        "--criterion",
        "11",
    ]);
    let b = report(&[
        "verify",
        "--builtin",
        "--criterion",
        "1",
        "--criterion",
        "11",
    ]);
    assert_ne!(a["results"], b["results"]);
    let passed = |r: &Value| -> Vec<Value> {
        r["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["passed"].clone())
            .collect()
    };
    assert_eq!(passed(&a), passed(&b));
}

#[test]
fn verify_zero_trials_warns() {
    let r = report(&["verify", "--builtin", "--trials", "0"]);
    assert!(!r["warnings"].as_array().unwrap().is_empty());
    let r = report(&["verify", &data("conditional.json"), "--trials", "0"]);
    assert!(!r["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify", &data("composite.json"), "--seed", "3"];
    assert_eq!(dro(&args).stdout, dro(&args).stdout);
}

/// Every number printed in the text report also appears in the JSON report.
#[test]
fn text_numbers_match_json() {
    let base = [
        "solve",
        &data("dp.json"),
        "--problem",
        "hedge",
        "--enumerate",
    ];
    let json = String::from_utf8(dro(&base).stdout).unwrap();
    let mut text_args = base.to_vec();
    text_args.extend(["--format", "text"]);
    let text = String::from_utf8(dro(&text_args).stdout).unwrap();
    let numbers: Vec<&str> = text
        .split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == 'e'))
        .filter(|t| t.contains('.') && t.parse::<f64>().is_ok())
        .collect();
    assert!(numbers.contains(&"2.6000000000000005"));
    for n in numbers {
        assert!(json.contains(n), "{n} missing from JSON");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("dro-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = dro(&[
        "eval-static",
        &data("static_family.json"),
        "--variable",
        "Z",
        "--set",
        "vertices",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["command"], "eval-static");
}

#[test]
fn failing_check_exits_one() {
    // residuals of a few ulps exceed a zero tolerance
    let out = dro(&[
        "verify",
        "--builtin",
        "--criterion",
        "1",
        "--tolerance",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["checks"][0]["passed"], false);
}

#[test]
fn negative_tolerance_rejected() {
    let out = dro(&["verify", "--builtin", "--tolerance=-1"]);
    assert_eq!(out.status.code(), Some(2));
}
