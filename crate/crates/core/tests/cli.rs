use std::fs;
use std::process::Command;

use compound_hawkes::cli::{read_series, run, RunManifest};
use compound_hawkes::model::{ModelConfig, BIVARIATE_RANDOM_TOML};
use compound_hawkes::transforms::cumulant_value;

/// Run the CLI in-process; returns (exit code, stdout, stderr).
fn chawkes(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("chawkes").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn column<'a>(rows: &'a [std::collections::HashMap<String, String>], key: &str) -> Vec<&'a str> {
    rows.iter().map(|r| r[key].as_str()).collect()
}

#[test]
fn validate_reports_the_bundled_model() {
    let (code, out, _) = chawkes(&["validate"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rho = v["rho"].as_f64().unwrap();
    assert!((rho - 0.41667).abs() < 1e-4, "{rho}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unstable = dir.path().join("unstable.toml");
    fs::write(
        &unstable,
        BIVARIATE_RANDOM_TOML.replace("params = [2.0, 3.3333333333333335]", "params = [0.2, 0.2]"),
    )
    .unwrap();
    let (code, _, err) = chawkes(&["validate", "--config", unstable.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("\"unstable\""), "{err}");

    let broken = dir.path().join("broken.toml");
    fs::write(&broken, "dims = { d = 2 ").unwrap();
    assert_eq!(
        chawkes(&["validate", "--config", broken.to_str().unwrap()]).0,
        1
    );

    // a seed is mandatory for anything random
    let (code, _, err) = chawkes(&["ruin", "--component", "1", "--level", "5"]);
    assert_eq!(code, 1, "{err}");

    let poor = dir.path().join("poor.toml");
    fs::write(
        &poor,
        BIVARIATE_RANDOM_TOML.replace("premium = [8.0, 8.0]", "premium = [3.0, 8.0]"),
    )
    .unwrap();
    let (code, _, err) = chawkes(&[
        "theta-star",
        "--component",
        "1",
        "--config",
        poor.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("net_profit"), "{err}");

    let (code, out, _) = chawkes(&[
        "ruin",
        "--component",
        "1",
        "--level",
        "10",
        "--seed",
        "1",
        "--max-runs",
        "60",
        "--epsilon",
        "0.001",
    ]);
    assert_eq!(code, 4);
    assert!(out.contains("max_runs_exceeded"), "{out}");

    assert_eq!(chawkes(&["no-such-command"]).0, 1);
}

#[test]
fn theta_star_and_cumulant() {
    let (code, out, _) = chawkes(&["theta-star", "--component", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(
        (v["theta"][0].as_f64().unwrap() - 0.0824).abs() < 1e-4,
        "{out}"
    );
    assert_eq!(v["active_set"][0], 1);
    let (code, out, _) = chawkes(&["cumulant", "--theta", "0,0"]);
    assert_eq!(code, 0, "{out}");
    let (code, _, _) = chawkes(&["boundary", "--direction", "1,1"]);
    assert_eq!(code, 0);
}

#[test]
fn twist_model_output_reparses() {
    let (code, out, err) = chawkes(&["twist-model", "--theta", "0.08,0"]);
    assert_eq!(code, 0, "{err}");
    let q = ModelConfig::from_toml_str(&out).unwrap().build().unwrap();
    assert!((q.lambda_bar()[0] - 0.5).abs() > 1e-3);
    assert!(cumulant_value(&q, &[0.0, 0.0]).abs() < 1e-12);
    let (code, out, _) = chawkes(&["twist-model", "--theta", "0.08,0", "--format", "json"]);
    assert_eq!(code, 0);
    ModelConfig::from_json_str(&out).unwrap().build().unwrap();
}

#[test]
fn manifest_regenerates_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap().to_string();
    let args = [
        "ruin",
        "--component",
        "1",
        "--level",
        "1,5",
        "--seed",
        "3",
        "--out",
        &out,
    ];
    let (code, _, err) = chawkes(&args);
    assert_eq!(code, 0, "{err}");
    let first = fs::read_to_string(dir.path().join("ruin.csv")).unwrap();
    let manifest = RunManifest::read(dir.path().join("ruin.manifest.json")).unwrap();
    assert_eq!(manifest.seed, Some(3));
    assert_eq!(manifest.subcommand, "ruin");

    let argv: Vec<&str> = manifest.command[1..].iter().map(String::as_str).collect();
    let (code, _, _) = chawkes(&argv);
    assert_eq!(code, 0);
    let second = fs::read_to_string(dir.path().join("ruin.csv")).unwrap();
    let (a, b) = (read_series(&first).unwrap(), read_series(&second).unwrap());
    assert_eq!(a.len(), 2);
    for (x, y) in a.iter().zip(&b) {
        for (k, v) in x {
            if k != "wall_time" {
                assert_eq!(v, &y[k], "column {k}");
            }
        }
    }
    // every float column round-trips at full precision
    let est: f64 = a[0]["estimate"].parse().unwrap();
    assert!(est > 0.2 && est < 0.5);
}

#[test]
fn reproduce_small_grid() {
    let (code, out, err) = chawkes(&[
        "reproduce",
        "table1",
        "--grid",
        "1,2",
        "--seed",
        "1",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = read_series(&out).unwrap();
    assert_eq!(column(&rows, "status"), vec!["ok", "ok"]);
    let p: Vec<f64> = column(&rows, "p_rand")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    let bound: Vec<f64> = column(&rows, "lundberg_rand")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(p[0] > p[1] && p[0] < bound[0]);

    let (code, out, err) = chawkes(&[
        "reproduce",
        "table2",
        "--grid",
        "1,70",
        "--seed",
        "1",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = read_series(&out).unwrap();
    assert_ne!(rows[0]["p_mc"], "n/a");
    assert_eq!(rows[1]["p_mc"], "n/a");
    assert_eq!(rows[1]["kappa"], "n/a");
}

#[test]
fn compare_and_union_rows() {
    let (code, out, err) = chawkes(&[
        "compare",
        "ruin",
        "--level",
        "1",
        "--seed",
        "2",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = read_series(&out).unwrap();
    assert_eq!(column(&rows, "method"), vec!["mc", "is"]);
    assert!(rows
        .iter()
        .any(|r| r["kappa"] != "n/a" && !r["kappa"].is_empty()));

    let (code, out, err) = chawkes(&[
        "union",
        "--target",
        "6,7",
        "--horizon",
        "2",
        "--seed",
        "2",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("method,"), "{out}");
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_chawkes");
    let ok = Command::new(bin).arg("validate").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin)
        .args(["ruin", "--component", "1", "--level", "5"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("\"error\""));
}
