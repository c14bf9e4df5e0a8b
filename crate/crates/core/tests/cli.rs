//! End-to-end runs of the `copula-forge` binary.

use std::process::{Command, Output};

use copula_forge::cli::read_grid_csv;
use copula_forge::{parse_copula_spec, sample_grid};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copula-forge"))
        .args(args)
        .env("COPULA_FORGE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_prints_the_value() {
    let o = run(&["eval", "-c", "pp:1", "-u", "0.2", "-v", "0.4"]);
    assert_eq!(o.status.code(), Some(0));
    let value: f64 = stdout(&o).trim().parse().unwrap();
    // 0.08 + (0.2 - 0.4) * 0.2 * 0.6
    assert!((value - 0.056).abs() < 1e-15);
}

#[test]
fn measures_json_has_every_field() {
    let o = run(&["measures", "-c", "mo:0.5,0.25", "-n", "256", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in [
        "tau",
        "rho",
        "gamma",
        "beta",
        "lambda_upper",
        "lambda_lower",
        "mu",
        "nu",
        "resolution",
        "error_estimates",
    ] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["resolution"], 256);
    assert!((report["tau"].as_f64().unwrap() - 0.2).abs() < 2e-3);
    assert!((report["lambda_upper"].as_f64().unwrap() - 0.25).abs() < 1e-4);
}

#[test]
fn check_reports_pass_and_violation() {
    let o = run(&["check", "-c", "pq:-1", "--rectangles", "500"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("passed = true"));

    let o = run(&["check", "-c", "mix(0.5*w+0.5*m)", "--rectangles", "500", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["seed"], 42);
}

#[test]
fn bad_input_exits_two() {
    for args in [
        &["eval", "-c", "t(pi", "-u", "0.5", "-v", "0.5"][..],
        &["eval", "-c", "pi", "-u", "1.5", "-v", "0.5"],
        &["eval", "-c", "mo:1,0.5", "-u", "0.5", "-v", "0.5"],
        &["measures", "-c", "pi", "-n", "100"],
        &["frobnicate"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    let o = run(&["eval", "-c", "t(pi", "-u", "0.5", "-v", "0.5"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("byte 4"));
}

#[test]
fn grid_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let o = run(&["grid", "-c", "sym(mo:0.5,0.25)", "-n", "32", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());

    let read = read_grid_csv(std::fs::File::open(&path).unwrap()).unwrap();
    let expected = sample_grid(&parse_copula_spec("sym(mo:0.5,0.25)").unwrap(), 32).unwrap();
    assert_eq!(read.n(), 32);
    assert_eq!(read.values(), expected.values());
}

#[test]
fn asymmetry_brackets_one_over_twenty_seven() {
    let o = run(&["asymmetry", "-c", "pp:1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (lo, hi) = (r["mu_lower"].as_f64().unwrap(), r["mu_upper"].as_f64().unwrap());
    assert!(lo <= 1.0 / 27.0 && 1.0 / 27.0 <= hi);
    assert!(hi - lo <= 1e-4);
}

#[test]
fn identities_pass() {
    let o = run(&["identities"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("= false"));
}
