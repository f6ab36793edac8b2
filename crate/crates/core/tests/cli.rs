use std::process::{Command, Output};

fn pu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pu")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

/// Non-comment lines of a CSV output.
fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn regime_default_grid() {
    let o = pu(&["regime"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# seed=7"));
    let rows = body(&text);
    assert_eq!(rows.len(), 5);
    let tags: Vec<&str> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(tags, ["MixedRealImaginary", "RealDistinct", "Degenerate", "ComplexPair"]);
}

#[test]
fn regime_zero_lambda_row_is_marked() {
    let o = pu(&["regime", "--lambda=0,0.15"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows = body(&text);
    assert!(rows[1].starts_with("0,error:"), "{}", rows[1]);
    assert_eq!(rows[1].split(',').count(), rows[0].split(',').count());
}

#[test]
fn regime_epsilon_sweep_has_error_columns() {
    let o = pu(&["regime", "--epsilon", "0.1,0.01", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let e1 = rows[0]["omega1_first_order_err"].as_f64().unwrap();
    let e2 = rows[1]["omega1_first_order_err"].as_f64().unwrap();
    // First-order error shrinks quadratically.
    assert!((e1 / e2 - 100.0).abs() < 10.0, "{e1} {e2}");
}

#[test]
fn spectrum_ground_rows() {
    let o = pu(&["spectrum", "--lambda", "0.15", "--levels", "2"]);
    let text = stdout(&o);
    let rows = body(&text);
    assert_eq!(rows[0], "n1,n2,E_indefinite,E_positive");
    let cells: Vec<f64> = rows[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cells[2] + 0.612921).abs() < 1e-6);
    assert!((cells[3] - 1.719785).abs() < 1e-6);
}

#[test]
fn spectrum_degenerate_grid() {
    let o = pu(&["spectrum", "--lambda", "0.25", "--levels", "3", "--k", "1"]);
    let text = stdout(&o);
    let row = body(&text).into_iter().find(|r| r.starts_with("2,1,")).unwrap();
    let e: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((e - 2.328427).abs() < 1e-6);
}

#[test]
fn spectrum_empty_grid_is_header_only() {
    let o = pu(&["spectrum", "--lambda", "0.15", "--levels", "0"]);
    assert!(o.status.success());
    assert_eq!(body(&stdout(&o)), vec!["n1,n2,E_indefinite,E_positive"]);
}

#[test]
fn spectrum_regime_mismatch_is_usage_error() {
    assert_eq!(pu(&["spectrum", "--lambda", "1"]).status.code(), Some(2));
    assert_eq!(pu(&["spectrum", "--lambda", "0.1", "--epsilon", "0.1"]).status.code(), Some(2));
}

#[test]
fn limit_scan_single_step() {
    let o = pu(&["limit-scan", "--steps", "1"]);
    assert!(o.status.success());
    assert_eq!(body(&stdout(&o)).len(), 2);
}

#[test]
fn limit_scan_default_decreases_with_slope_column() {
    let o = pu(&["limit-scan", "--n", "0", "--k", "1"]);
    let text = stdout(&o);
    let rows = body(&text);
    let header: Vec<&str> = rows[0].split(',').collect();
    let sup = header.iter().position(|c| *c == "sup_err").unwrap();
    let slope = header.iter().position(|c| *c == "sqrt_eps_slope").unwrap();
    let errs: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(sup).unwrap().parse().unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] <= 1.05 * w[0]));
    let last: f64 = rows.last().unwrap().split(',').nth(slope).unwrap().parse().unwrap();
    assert!((last - 0.5).abs() < 0.05, "{last}");
}

#[test]
fn jordan_json_and_limits() {
    let o = pu(&["jordan", "--max-n", "20"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 21);
    assert_eq!(reports[0]["zero_norm"], "1");
    for r in &reports[1..] {
        assert_eq!(r["is_single_block"], true);
        assert_eq!(r["zero_norm"], "0");
    }
    assert_eq!(pu(&["jordan", "--max-n", "65"]).status.code(), Some(2));
}

#[test]
fn jordan_is_deterministic() {
    let a = pu(&["jordan", "--max-n", "12", "--seed", "3"]);
    let b = pu(&["jordan", "--max-n", "12", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_suite_subset_passes() {
    let o = pu(&["verify-all", "--suite", "1,2,10", "--max-n", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all 3 suites passed"));
}

#[test]
fn verify_corrupted_tolerance_names_the_check() {
    let o = pu(&["verify-all", "--suite", "2", "--tolerance-scale", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL decoupling map symplectic"));
}

#[test]
fn verify_json_is_machine_readable() {
    let o = pu(&["verify-all", "--suite", "1", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"][0]["id"], 1);
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("pu-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("regime.csv");
    let o = pu(&["regime", "--out", path.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# command=regime"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn help_cites_equations() {
    for (cmd, eq) in [("regime", "Eq. 3"), ("spectrum", "Eq. (19)"), ("limit-scan", "Eq. (28)"), ("jordan", "(45)"), ("verify-all", "Eq. 38")] {
        let o = pu(&[cmd, "--help"]);
        assert!(stdout(&o).contains(eq), "{cmd}");
    }
}

#[test]
fn bad_flag_is_usage_error() {
    assert_eq!(pu(&["regime", "--bogus"]).status.code(), Some(2));
}
