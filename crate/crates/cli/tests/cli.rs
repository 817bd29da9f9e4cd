use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn margext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_margext"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut full = vec!["--json", path.to_str().unwrap()];
    full.extend_from_slice(args);
    let out = margext(&full);
    let report = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    (out.status.code().unwrap(), report)
}

fn assertion<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["name"] == name)
        .unwrap_or_else(|| panic!("no assertion {name}"))
}

#[test]
fn verify_paper_family_exact() {
    let (code, r) = run_json(&["verify", "paper", "3", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "pass");
    let cert = &r["certificates"][0];
    assert_eq!(cert["extremal"], true);
    assert_eq!(cert["gram_rank"], 25);
    assert_eq!(cert["mode"], "exact");
    assert_eq!(r["verdicts"][0]["choi_rank"], 5);
    assert_eq!(r["verdicts"][0]["conclusion"], "separable");
    assert_eq!(assertion(&r, "separable")["passed"], true);
}

#[test]
fn eb_rank_note_for_two_five_family() {
    let (code, r) = run_json(&["verify", "paper", "2", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["verdicts"][0]["eb_rank_note"], 5);
}

#[test]
fn verify_hermitian_and_tensor_families() {
    for (args, rank) in [
        (vec!["verify", "ohno4"], 4),
        (vec!["verify", "sigma2"], 2),
        (vec!["verify", "ohno-d", "5"], 5),
        (vec!["verify", "rank8-66"], 8),
        (vec!["verify", "rank8k", "3"], 24),
    ] {
        let (code, r) = run_json(&args);
        assert_eq!(code, 0, "{args:?}: {r}");
        assert_eq!(r["verdicts"][0]["choi_rank"], rank);
        assert_eq!(r["certificates"][0]["mode"], "numerical");
        assert!(r["certificates"][0]["gap"].as_f64().unwrap() > 1e3);
    }
}

#[test]
fn stdout_carries_json_without_flag() {
    let out = margext(&["verify", "paper", "2", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["command"], "verify");
}

#[test]
fn usage_errors_exit_two_with_report() {
    for args in [
        vec!["verify", "nonesuch"],
        vec!["verify", "paper", "1", "3"],
        vec!["verify", "sigma2", "--exact"],
        vec!["table", "--d-max", "7"],
        vec!["verify", "rank8k", "5"],
    ] {
        let (code, r) = run_json(&args);
        assert_eq!(code, 2, "{args:?}");
        assert_eq!(r["status"], "usage");
        assert!(r["error"].is_string());
    }
    let out = margext(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["status"], "usage");
}

#[test]
fn limits_can_be_lifted() {
    let (code, r) = run_json(&["--max-dim", "1600", "verify", "rank8k", "5"]);
    assert_eq!(code, 0, "{r}");
    let (code, _) = run_json(&["--override-limits", "table", "--d-min", "7", "--d-max", "7", "--m-max", "1"]);
    assert_eq!(code, 0);
}

#[test]
fn table_rows_follow_input_order() {
    let (code, r) = run_json(&["table", "--d-max", "4", "--m-max", "3"]);
    assert_eq!(code, 0);
    let rows = r["table_rows"].as_array().unwrap();
    let dims: Vec<(u64, u64)> = rows.iter().map(|x| (x["d1"].as_u64().unwrap(), x["d2"].as_u64().unwrap())).collect();
    assert_eq!(&dims[..4], &[(2, 3), (2, 4), (2, 5), (3, 4)]);
    assert_eq!(dims[dims.len() - 2..], [(6, 6), (18, 18)]);
    let row_4_6 = rows.iter().find(|x| x["d1"] == 4 && x["d2"] == 6).unwrap();
    assert_eq!(row_4_6["bound"], 7);
    assert_eq!(row_4_6["attained"], false);
    let row_2_3 = &rows[0];
    assert_eq!((row_2_3["constructed_rank"].as_u64(), row_2_3["attained"].as_bool()), (Some(3), Some(true)));
}

#[test]
fn oracle_reports_deviations() {
    let (code, r) = run_json(&["oracle", "2", "2"]);
    assert_eq!(code, 0);
    let devs = &r["oracle_deviations"];
    assert_eq!(devs["choi_pt_vs_closed_form"], 0.0);
    assert_eq!(devs["gram_vs_expanded_sum"], 0.0);
    assert!(devs["gram_vs_closed_form"].as_f64().unwrap() > 0.0);
    assert_eq!(r["warnings"].as_array().unwrap().len(), 1);
    let (code, r) = run_json(&["--numerical", "oracle", "3", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["certificates"][0]["gram_rank"], 25);
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    let a = strip(run_json(&["--seed", "9", "proptest", "--count", "20"]).1);
    let b = strip(run_json(&["--seed", "9", "proptest", "--count", "20"]).1);
    assert_eq!(a, b);
    assert_eq!(a["status"], "pass");
    let c = strip(run_json(&["verify", "ohno4"]).1);
    let d = strip(run_json(&["verify", "ohno4"]).1);
    assert_eq!(c, d);
}

#[test]
fn tight_tolerance_gives_borderline_exit() {
    let (_, r) = run_json(&["verify", "ohno4"]);
    let smallest = r["certificates"][0]["smallest_kept_singular_value"].as_f64().unwrap();
    let tol = format!("{:e}", smallest / 2.0);
    let (code, r) = run_json(&["--tol", &tol, "verify", "ohno4"]);
    assert_eq!(code, 3, "{r}");
    assert_eq!(r["status"], "borderline");
    assert_eq!(r["certificates"][0]["borderline"], true);
}

#[test]
fn loose_tolerance_fails_extremality() {
    let (code, r) = run_json(&["--tol", "10", "verify", "ohno4"]);
    assert_eq!(code, 1, "{r}");
    assert_eq!(assertion(&r, "extremal")["passed"], false);
}

fn write_family(dir: &Path, ops: &str, d_in: usize, d_out: usize) -> String {
    let path = dir.join("family.json");
    fs::write(&path, format!(r#"{{"d_in": {d_in}, "d_out": {d_out}, "ops": {ops}}}"#)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_family_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = 0.5f64.sqrt();
    let ops = format!(r#"[{{"rows": 2, "cols": 2, "entries": [[{h}, 0], [0, 0], [0, 0], [{h}, 0]]}}]"#);
    let path = write_family(dir.path(), &ops, 2, 2);
    let (code, r) = run_json(&["verify", "--family-json", &path]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["certificates"][0]["extremal"], true);
    assert_eq!(r["verdicts"][0]["conclusion"], "entangled");

    let bad = write_family(dir.path(), "[]", 2, 2);
    let (code, _) = run_json(&["verify", "--family-json", &bad]);
    assert_eq!(code, 2);
}
