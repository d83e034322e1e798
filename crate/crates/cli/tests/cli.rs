//! End-to-end checks of the command-line surface: flags, exit codes,
//! output shapes, and reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_interval-stats"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_csv(name: &str, content: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("interval-stats-test-{name}-{}.csv", std::process::id()));
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn describe_bundled_cars() {
    let out = run(&["describe", "cars.csv"]);
    let v = stdout_json(&out);
    assert_eq!(v["n"], 8);
    assert_eq!(v["p"], 4);
    let mean1 = v["variables"][0]["mean"].as_f64().unwrap();
    assert!((mean1 - 201.4687).abs() < 1e-3, "mean {mean1}");
    assert_eq!(v["covariances"].as_array().unwrap().len(), 6);
}

#[test]
fn describe_degenerate_file_has_zero_variance() {
    let path = temp_csv("degenerate", "a_1,b_1\n4,4\n");
    let out = run(&["describe", path.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["variables"][0]["variance"], 0.0);
    std::fs::remove_file(path).ok();
}

#[test]
fn missing_file_exits_two() {
    let out = run(&["describe", "no-such-file.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no such file"));
}

#[test]
fn estimate_medical_matches_published_table() {
    let out = run(&["estimate", "medical.csv", "--wishart-df", "57", "--method", "both"]);
    let v = stdout_json(&out);
    let estimates = v["estimates"].as_array().unwrap();
    assert_eq!(estimates.len(), 2);
    let ml = &estimates[0];
    assert_eq!(ml["method"], "ML");
    for (k, expected) in [74.5169, 146.7034, 83.4491].iter().enumerate() {
        let got = ml["mu"][k].as_f64().unwrap();
        assert!((got - expected).abs() < 1e-3, "mu[{k}] = {got}");
    }
    let sig11 = ml["sigma"][0][0].as_f64().unwrap();
    assert!((sig11 - 116.08446).abs() < 1e-2);
    let bayes = &estimates[1];
    let sig11_b = bayes["sigma"][0][0].as_f64().unwrap();
    assert!((sig11_b - 122.30327).abs() < 1e-2);
}

#[test]
fn estimate_cars_bayes_doubles_ml_sigma() {
    let out = run(&["estimate", "cars.csv", "--wishart-df", "5", "--method", "both"]);
    let v = stdout_json(&out);
    let estimates = v["estimates"].as_array().unwrap();
    let (ml, bayes) = (&estimates[0], &estimates[1]);
    for i in 0..4 {
        for j in 0..4 {
            let a = ml["sigma"][i][j].as_f64().unwrap();
            let b = bayes["sigma"][i][j].as_f64().unwrap();
            assert!(
                (b - 2.0 * a).abs() <= 1e-12 * a.abs().max(1.0),
                "sigma[{i}][{j}]: {b} vs 2*{a}"
            );
        }
    }
}

#[test]
fn estimate_with_confidence_intervals() {
    let out = run(&[
        "estimate", "medical.csv", "--wishart-df", "57", "--method", "ml", "--ci", "0.95",
    ]);
    let v = stdout_json(&out);
    let cis = v["estimates"][0]["confidence_intervals"].as_array().unwrap();
    assert_eq!(cis.len(), 3 + 6); // mu entries plus vech(Sigma)
    for ci in cis {
        let (lo, est, hi) = (
            ci["lower"].as_f64().unwrap(),
            ci["estimate"].as_f64().unwrap(),
            ci["upper"].as_f64().unwrap(),
        );
        assert!(lo < est && est < hi);
    }

    // Wildly different variable scales (cylinder capacity vs seconds) must
    // not break the interval computation.
    let out = run(&[
        "estimate", "cars.csv", "--wishart-df", "5", "--method", "both", "--ci", "0.95",
    ]);
    let v = stdout_json(&out);
    assert_eq!(
        v["estimates"][0]["confidence_intervals"].as_array().unwrap().len(),
        4 + 10
    );
}

#[test]
fn estimate_bayes_needs_more_rows_than_vars() {
    let path = temp_csv("small", "a_1,b_1,a_2,b_2,a_3,b_3\n1,2,3,4,5,6\n2,3,4,5,6,7\n");
    let out = bin()
        .args(["estimate", path.to_str().unwrap(), "--wishart-df", "5", "--method", "bayes"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("posterior mean"));
    std::fs::remove_file(path).ok();
}

#[test]
fn estimate_rejects_small_wishart_df() {
    let out = run(&["estimate", "medical.csv", "--wishart-df", "2", "--method", "ml"]);
    assert_eq!(out.status.code(), Some(2)); // m < p is an input error
}

#[test]
fn simulate_is_byte_reproducible() {
    let args = ["simulate", "--scenario", "I", "--n", "100", "--reps", "100", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_scenario_ii_parameter_set() {
    let out = run(&[
        "simulate", "--scenario", "II", "--n", "30", "--reps", "20", "--seed", "1", "--out", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("parameter,estimator,mean,sd\n"));
    for parameter in ["sigma2_1", "sigma2_2", "sigma_12", "lambda_11", "lambda_22", "lambda_12"] {
        assert!(text.contains(parameter), "missing {parameter}");
    }
}

#[test]
fn simulate_unknown_scenario_exits_two() {
    let out = run(&["simulate", "--scenario", "IV", "--n", "10", "--reps", "5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_full_scale_uses_published_replication_count() {
    let out = run(&["simulate", "--scenario", "I", "--n", "25", "--full-scale", "--seed", "2"]);
    let v = stdout_json(&out);
    assert_eq!(v["reps"], 10_000);
    // An explicit --reps wins over the flag.
    let out = run(&[
        "simulate", "--scenario", "I", "--n", "25", "--full-scale", "--reps", "30", "--seed", "2",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["reps"], 30);
}

#[test]
fn gof_reports_all_three_tests() {
    let out = run(&[
        "gof", "medical.csv", "--wishart-df", "57", "--bootstrap", "0", "--seed", "1",
    ]);
    let v = stdout_json(&out);
    for key in ["mardia_skewness", "mardia_kurtosis", "wishart"] {
        let p = v[key]["p_value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p), "{key} p-value {p}");
    }
    assert_eq!(v["wishart"]["method"], "wishart-gof");
    assert_eq!(v["wishart"]["seed"], 1);
    // Rejection is report content, not an exit condition.
    assert!(out.status.success());
}

#[test]
fn gof_bootstrap_on_cars() {
    let out = run(&[
        "gof", "cars.csv", "--wishart-df", "5", "--bootstrap", "100", "--seed", "1",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["wishart"]["method"], "wishart-gof-boot");
    assert_eq!(v["wishart"]["bootstrap"], 100);
    let p = v["wishart"]["p_value"].as_f64().unwrap();
    assert!(p > 0.05, "cars fit rejected: p = {p}");
}

#[test]
fn gof_single_row_exits_two() {
    let path = temp_csv("single", "a_1,b_1\n1,2\n");
    let out = bin()
        .args(["gof", path.to_str().unwrap(), "--wishart-df", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient observations"));
    std::fs::remove_file(path).ok();
}

#[test]
fn risk_reports_gaps_and_closed_forms() {
    let out = run(&["risk", "--scenario", "III", "--n", "25", "--reps", "400", "--seed", "3"]);
    let v = stdout_json(&out);
    assert!(v["sigma_gap"]["mean"].as_f64().unwrap() > 0.0);
    let ds = v["closed_form_delta_sigma"].as_f64().unwrap();
    assert!((ds - (25.0f64 / 24.0).ln()).abs() < 1e-12);
    assert_eq!(v["reports"].as_array().unwrap().len(), 4);
    assert_eq!(v["scenario"], "III");
}

#[test]
fn risk_rejects_single_replication() {
    let out = run(&["risk", "--scenario", "I", "--n", "25", "--reps", "1", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_error_names_row_and_variable() {
    let path = temp_csv("badrow", "a_1,b_1\n9,3\n");
    let out = bin().args(["describe", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("lower > upper at row 1, var 1"),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::remove_file(path).ok();
}
