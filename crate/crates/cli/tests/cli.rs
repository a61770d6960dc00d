use std::process::{Command, Output};

use cbmw::{AlgElem, GenWord, Params, RhoBranch, RingElem};
use serde_json::Value;

fn cbmw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbmw"))
        .args(args)
        .env_remove("CBMW_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("error JSON on stderr");
    serde_json::from_str(line).unwrap()
}

#[test]
fn dim_reports_pass() {
    let out = cbmw(&["dim", "--n", "2", "--r", "2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["bmw"]["enumerated"], "12");
    assert_eq!(v["hecke"]["formula"], "8");
    assert_eq!(v["pass"], true);
}

#[test]
fn reduce_output_reparses_to_library_value() {
    let out = cbmw(&["reduce", "--n", "2", "--r", "2", "--word", "e1 y e1", "--quiet"]);
    assert!(out.status.success());
    let x: AlgElem = serde_json::from_slice(&out.stdout).unwrap();
    let p = Params::universal(2, RhoBranch::default_for(2)).unwrap();
    let e1 = cbmw::reduce(&[(RingElem::one(), GenWord::parse(2, "e1").unwrap())], &p).unwrap();
    assert_eq!(x, e1.scale(&p.delta(1).unwrap()));
    assert!(out.stderr.is_empty());
}

#[test]
fn weighted_terms() {
    let out = cbmw(&["reduce", "--n", "1", "--r", "2", "--word", "3/2: y", "--word", "-3/2:y", "--quiet"]);
    assert!(out.status.success());
    let x: AlgElem = serde_json::from_slice(&out.stdout).unwrap();
    assert!(x.is_zero());
}

#[test]
fn relations_all_pass() {
    let out = cbmw(&["relations", "--n", "3", "--r", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["pass"], true);
    let csv = cbmw(&["relations", "--n", "2", "--r", "2", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("label,pass\n"));
    assert!(!text.contains(",false"));
}

#[test]
fn progress_goes_to_stderr() {
    let out = cbmw(&["gram", "--n", "2", "--r", "1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[cbmw]"));
    let v = stdout_json(&out);
    assert_eq!(v["rank"], 3);
    assert_eq!(v["full_rank"], true);
}

#[test]
fn gram_csv_is_square() {
    let out = cbmw(&["gram", "--n", "2", "--r", "1", "--format", "csv", "--quiet"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split("\",\"").count() == 3));
}

#[test]
fn error_kinds_have_distinct_codes() {
    let parse = cbmw(&["reduce", "--n", "2", "--word", "bogus"]);
    assert_eq!(parse.status.code(), Some(2));
    assert_eq!(stderr_error(&parse)["error"]["kind"], "parse");

    let invalid = cbmw(&["params", "--mode", "numeric", "--r", "1", "--q", "-1", "--u", "2"]);
    assert_eq!(invalid.status.code(), Some(3));
    assert_eq!(stderr_error(&invalid)["error"]["kind"], "invalid-input");

    let usage = cbmw(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(2));

    let missing = cbmw(&["params", "--mode", "numeric", "--r", "2", "--q", "3/2"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numeric_params_round_trip() {
    let out = cbmw(&["params", "--mode", "numeric", "--r", "2", "--q", "7/5", "--u", "11/3,-13/7"]);
    assert!(out.status.success());
    let p: Params = serde_json::from_slice(&out.stdout).unwrap();
    let direct = Params::numeric(2, RhoBranch::default_for(2), cbmw::params::rat(7, 5), vec![
        cbmw::params::rat(11, 3),
        cbmw::params::rat(-13, 7),
    ])
    .unwrap();
    assert_eq!(p, direct);
}

#[test]
fn warm_cache_matches_cold() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["multiply", "--n", "2", "--r", "2", "--left", "g1 y", "--right", "e1 y^-1 g1", "--cache-dir", d, "--quiet"];
    let cold = cbmw(&args);
    assert!(cold.status.success());
    let stats = stdout_json(&cbmw(&["cache", "stats", "--cache-dir", d]));
    assert_eq!(stats["files_on_disk"], 1);
    let warm = cbmw(&args);
    assert_eq!(cold.stdout, warm.stdout);
    let cleared = stdout_json(&cbmw(&["cache", "clear", "--cache-dir", d]));
    assert_eq!(cleared["removed"], 1);
    let again = cbmw(&args);
    assert_eq!(cold.stdout, again.stdout);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cbmw"))
        .args(["multiply", "--n", "1", "--r", "2", "--left", "y", "--right", "y", "--quiet"])
        .env("CBMW_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn trace_of_g1() {
    let out = cbmw(&["trace", "--n", "2", "--r", "2", "--word", "g1", "--quiet"]);
    let v = stdout_json(&out);
    let value: RingElem = serde_json::from_value(v["value"].clone()).unwrap();
    let p = Params::universal(2, RhoBranch::default_for(2)).unwrap();
    assert_eq!(value, p.rho().div(p.delta0()).unwrap());
}

#[test]
fn invariant_with_moves() {
    let out = cbmw(&["invariant", "--n", "2", "--r", "2", "--braid", "s1 t s1^-1 t", "--moves", "--quiet"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["pass"], true);
    let unknot = cbmw(&["invariant", "--n", "2", "--r", "2", "--braid", "s1", "--quiet"]);
    let v = stdout_json(&unknot);
    assert_eq!(serde_json::from_value::<RingElem>(v["normalized"].clone()).unwrap(), RingElem::one());
}

#[test]
fn hecke_subcommands() {
    let dim = cbmw(&["hecke", "dim", "--n", "3", "--r", "2"]);
    assert!(dim.status.success());
    assert_eq!(stdout_json(&dim)["normal_words"], 48);
    let rel = cbmw(&["hecke", "relations", "--n", "2", "--r", "2", "--mode", "numeric", "--q", "1", "--u", "2,-3"]);
    assert!(rel.status.success());
    let reduce = cbmw(&["hecke", "reduce", "--n", "2", "--r", "2", "--word", "g1^-1", "--quiet"]);
    let v = stdout_json(&reduce);
    assert_eq!(v["mode"], "hecke");
    assert_eq!(v["terms"].as_array().unwrap().len(), 1);
    let check = cbmw(&["hecke", "check", "--n", "2", "--r", "2", "--quiet"]);
    assert!(check.status.success());
}

#[test]
fn admissible_check_passes() {
    for r in ["1", "2", "3"] {
        let out = cbmw(&["admissible-check", "--r", r]);
        assert!(out.status.success(), "r = {r}");
        assert_eq!(stdout_json(&out)["pass"], true);
    }
}
