//! End-to-end checks of the command-line surface: flag parsing, config
//! files, exit codes, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

fn ergotrim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergotrim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

#[test]
fn digits_gauss_prints_ten_digits() {
    let out = ergotrim(&["digits", "--system", "gauss", "--seed", "7", "--n", "10"]);
    assert!(out.status.success());
    let line = stdout(&out);
    assert_eq!(line.trim().split_whitespace().count(), 10);
}

#[test]
fn digits_is_seed_deterministic() {
    let a = ergotrim(&["digits", "--system", "gauss", "--seed", "11", "--n", "50"]);
    let b = ergotrim(&["digits", "--system", "gauss", "--seed", "11", "--n", "50"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn digits_rational_hook() {
    let out = ergotrim(&["digits", "--x-rational", "415/93", "--n", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "2 6 7");
}

#[test]
fn digits_quadratic_hook() {
    let out = ergotrim(&["digits", "--x-quadratic", "-1,1,5,2", "--n", "6"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1 1 1 1 1 1");
}

#[test]
fn trim_matches_module_example() {
    let out = ergotrim(&["trim", "--values", "3,1,4,1,5", "--threshold", "4"]);
    assert!(out.status.success());
    let line = stdout(&out);
    assert!(line.contains("raw=14"));
    assert!(line.contains("trimmed=9"));
    assert!(line.contains("delta=1"));
}

#[test]
fn missing_config_file_is_usage_error() {
    let out = ergotrim(&["experiment", "--config", "definitely-missing.conf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("definitely-missing.conf"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = ergotrim(&["digits", "--frobnicate", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_required_flag_is_usage_error() {
    let out = ergotrim(&["digits", "--system", "gauss"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--n"));
}

#[test]
fn runtime_error_exits_two() {
    // a 2-bit budget cannot produce any digit
    let out = ergotrim(&[
        "digits", "--system", "gauss", "--seed", "1", "--n", "5", "--budget", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn help_exits_zero_everywhere() {
    for sub in [
        None,
        Some("digits"),
        Some("trim"),
        Some("mainterm"),
        Some("mixing"),
        Some("experiment"),
        Some("counterexample"),
        Some("check-hypothesis"),
    ] {
        let mut args: Vec<&str> = Vec::new();
        if let Some(s) = sub {
            args.push(s);
        }
        args.push("--help");
        let out = ergotrim(&args);
        assert_eq!(out.status.code(), Some(0), "--help for {sub:?}");
        assert!(stdout(&out).contains("Usage"), "--help for {sub:?}");
    }
}

#[test]
fn mainterm_csv_schema() {
    let out = ergotrim(&["mainterm", "--system", "gauss", "--ngrid", "10,100"]);
    assert!(out.status.success());
    let body = stdout(&out);
    let header = body
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column header");
    assert_eq!(header, "N,F1,F2,G,F3,tau");
    assert!(body.lines().any(|l| l.starts_with("10,")));
    assert!(body.lines().any(|l| l.starts_with("100,")));
    // effective config is echoed
    assert!(body.lines().any(|l| l.starts_with("# system=")));
}

#[test]
fn mixing_exact_doubling() {
    let out = ergotrim(&[
        "mixing", "--system", "doubling", "--gmode", "exact", "--gcap", "2", "--n", "6",
    ]);
    assert!(out.status.success());
    let body = stdout(&out);
    let header = body
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column header");
    assert_eq!(header, "N,g,G,mode");
    assert!(body.contains("1,1,1,exact"));
}

#[test]
fn mixing_markov_matrix_flag() {
    let out = ergotrim(&[
        "mixing",
        "--system",
        "markov",
        "--matrix",
        "1/2,1/2;1/2,1/2",
        "--mvalues",
        "1,0",
        "--gmode",
        "exact",
        "--gcap",
        "2",
        "--n",
        "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("1,1,1,exact"));
}

#[test]
fn experiment_runs_from_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("lab.conf");
    std::fs::write(
        &config_path,
        "[experiment]\nsystem = gauss\nngrid = 8,32\nsamples = 3\nseed = 5\n",
    )
    .unwrap();
    let out_path = dir.path().join("records.csv");
    let out = ergotrim(&[
        "experiment",
        "--config",
        config_path.to_str().unwrap(),
        "--samples",
        "2", // flag overrides the config value 3
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = std::fs::read_to_string(&out_path).unwrap();
    assert!(body.contains("# sample_count=2"));
    let data_rows = body
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("seed"))
        .count();
    assert_eq!(data_rows, 4); // 2 samples x 2 grid points
    // one log line per sample on stderr
    assert_eq!(stderr(&out).lines().filter(|l| l.starts_with("sample ")).count(), 2);
}

#[test]
fn experiment_config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.conf");
    std::fs::write(&config_path, "[experiment]\nngrid = 8,32\nbanana = 1\n").unwrap();
    let out = ergotrim(&["experiment", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("banana"));
}

fn run_experiment_to(path: &Path, threads: &str) -> Output {
    ergotrim(&[
        "experiment",
        "--system",
        "gauss",
        "--ngrid",
        "16,64,256",
        "--samples",
        "6",
        "--seed",
        "99",
        "--threads",
        threads,
        "--out",
        path.to_str().unwrap(),
    ])
}

#[test]
fn experiment_output_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    assert!(run_experiment_to(&a, "1").status.success());
    assert!(run_experiment_to(&b, "1").status.success());
    assert!(run_experiment_to(&c, "8").status.success());
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());
    assert_eq!(bytes_a, std::fs::read(&c).unwrap());
}

#[test]
fn counterexample_dispersion_schema() {
    let out = ergotrim(&[
        "counterexample",
        "--system",
        "doubling",
        "--ngrid",
        "16,64",
        "--samples",
        "4",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = stdout(&out);
    let header = body
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column header");
    assert_eq!(header, "N,median,iqr,max_over_median");
}

#[test]
fn check_hypothesis_reports_verdict() {
    let out = ergotrim(&["check-hypothesis", "--system", "gauss", "--nmax", "200"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = stdout(&out);
    assert!(body.contains("verdict: consistent"), "{body}");
    assert!(body.contains("slope_r1:"));
}

#[test]
fn experiment_json_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.json");
    let out = ergotrim(&[
        "experiment",
        "--system",
        "gauss",
        "--ngrid",
        "8,16",
        "--samples",
        "2",
        "--seed",
        "4",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (config, records): (serde_json::Value, Vec<ergotrim::experiments::SampleRecord>) =
        ergotrim::experiments::read_json(&path).unwrap();
    assert_eq!(config["system"], "gauss-digit");
    assert_eq!(records.len(), 4);
}
