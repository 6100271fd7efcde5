use std::process::{Command, Output};

use serde_json::Value;

fn prosk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prosk")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = prosk(&["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(prosk(&["diam"]).status.code(), Some(2));
    assert_eq!(prosk(&["diam", "--group", "SL:d=2,Zp:p=4,N=2"]).status.code(), Some(2));
    assert_eq!(prosk(&["diam", "--group", "SL:d=2,Zp:p=3,N=2", "--gens", "sampled:x"]).status.code(), Some(2));
}

#[test]
fn oversized_enumeration_is_a_budget_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_prosk"))
        .args(["diam", "--group", "SL:d=3,Zp:p=5,N=3"])
        .env("PROSK_BUDGET_MB", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn non_generating_set_is_a_domain_error() {
    let dir = std::env::temp_dir().join(format!("prosk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gens.json");
    std::fs::write(&path, r#"{"elements": [[[1, 3], [0, 1]]]}"#).unwrap();
    let gens = format!("file:{}", path.display());
    let out = prosk(&["diam", "--group", "SL:d=2,Zp:p=3,N=2", "--gens", &gens]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn diam_reports_known_values() {
    let out = prosk(&["diam", "--group", "Additive,Zp:p=3,N=3"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["config"]["subcommand"], "diam");
    assert_eq!(r["result"]["diameter"], 13);
    assert_eq!(r["result"]["order"].to_string().trim_matches('"'), "27");
}

#[test]
fn compile_word_evaluates_to_target() {
    let out = prosk(&["compile", "--group", "SL:d=2,Zp:p=3,N=5", "--target", "[[2, 3], [3, 5]]"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let cert = &r["result"]["certificate"];
    assert_eq!(cert["within_budget"], true);
    assert_eq!(cert["length"], 4);
    assert_eq!(cert["residual_depth"], 5);
}

#[test]
fn verify_writes_report_file() {
    let dir = std::env::temp_dir().join(format!("prosk-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rings.json");
    let out = prosk(&["verify", "--suite", "rings", "--ring", "Zp:p=5,N=4", "--samples", "50", "--out"])
        .status
        .code();
    assert_eq!(out, Some(2));
    let out = prosk(&["--out", path.to_str().unwrap(), "verify", "--suite", "rings", "--ring", "Zp:p=5,N=4", "--samples", "50"]);
    assert!(out.status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["result"]["pass"], true);
    assert_eq!(r["result"]["suite"], "rings");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn walk_writes_csv_series() {
    let dir = std::env::temp_dir().join(format!("prosk-walk-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("walk.json");
    let out = prosk(&[
        "walk", "--group", "Nottingham,Fq[[t]]:q=3,N=4", "--trials", "5000", "--checkpoints", "4", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(path.with_extension("csv")).unwrap();
    assert!(csv.starts_with("l,tv_monte_carlo,tv_exact,agrees\n"));
    assert_eq!(csv.lines().count(), 5);
    std::fs::remove_dir_all(dir).ok();
}
