use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn summtool(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_summtool")).current_dir(dir).args(args).output().expect("binary runs")
}

fn report(dir: &Path, args: &[&str]) -> Value {
    let out = summtool(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    if out.stdout.is_empty() {
        return Value::Null;
    }
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn write(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, value.to_string()).unwrap();
    path
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn constant(dim: usize, entries: Vec<i64>, trunc: usize) -> Value {
    json!({ "trunc": trunc, "shape": [dim], "terms": [{ "n": 0, "m": 0, "entries":
        entries.iter().map(|v| json!({ "re": v, "im": 0 })).collect::<Vec<_>>() }] })
}

/// `f1 = f2 = y - c` in one dimension.
fn closing_system(exps: [usize; 4], c: i64, trunc: usize) -> Value {
    let f = json!([
        { "alpha": [0], "series": constant(1, vec![-c], trunc) },
        { "alpha": [1], "series": constant(1, vec![1], trunc) },
    ]);
    json!({ "exponents": exps, "dim": 1, "trunc": trunc, "f1": f, "f2": f })
}

#[test]
fn gevrey_order_of_the_poincare_series() {
    let dir = tempfile::tempdir().unwrap();
    report(dir.path(), &["witness", "--kind", "poincare", "--trunc", "40", "--out", "poincare.json"]);
    let r = report(dir.path(), &["gevrey", "--series", "poincare.json", "--monomial", "1,1", "--csv", "g.csv"]);
    let s = num(&r["result"]["estimate"]["s_hat"]);
    assert!((0.85..=1.15).contains(&s), "s_hat = {s}");
    assert_eq!(r["config"]["params"]["monomial"], "1,1");
    let csv = fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("degree,log_norm,fitted_log"));
    let degrees: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(!degrees.is_empty());
    assert!(degrees.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn rescaled_levels_are_compatible() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(dir.path(), &["levels", "--candidate", "1,1,1", "--components", "2,2,1/2"]);
    assert_eq!(r["result"]["compatible"], true);
    assert_eq!(r["result"]["normalization"]["terminal"]["kind"], "coincidence");
    let r = report(dir.path(), &["levels", "--candidate", "1,1,1", "--components", "2,1,1", "1,2,2"]);
    assert_eq!(r["result"]["compatible"], false);
    assert_eq!(r["result"]["normalization"]["terminal"]["kind"], "strict");
}

#[test]
fn identity_under_unequal_exponents_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "identity.json", &json!([[1, 0], [0, 1]]));
    write(dir.path(), "zero.json", &json!([[0, 0], [0, 0]]));
    let r = report(dir.path(), &["pfaffian", "classify", "--exponents", "1,2,1,1", "--A", "identity.json", "--B", "zero.json"]);
    assert_eq!(r["result"]["diagnosis"]["case"], "A_nilpotent_required");
    assert_eq!(r["result"]["diagnosis"]["violated"], true);
}

#[test]
fn decomposition_feeds_back_into_sum() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    report(p, &["witness", "--kind", "poincare", "--trunc", "40", "--mode", "rational", "--out", "f.json"]);
    report(p, &["decompose", "--series", "f.json", "--monomial", "1,1", "--mode", "rational", "--out", "d.json"]);
    let again = report(p, &["decompose", "--series", "d.json", "--monomial", "1,1", "--mode", "rational"]);
    let first: Value = serde_json::from_str(&fs::read_to_string(p.join("d.json")).unwrap()).unwrap();
    assert_eq!(first["result"]["decomposition"], again["result"]["decomposition"]);

    let args = |series: &'static str| ["sum", "--series", series, "--level", "1,1,1", "--point", "0.2,0.3"];
    let direct = report(p, &args("f.json"));
    let via = report(p, &args("d.json"));
    assert_eq!(direct["result"]["samples"], via["result"]["samples"]);
    let value = num(&direct["result"]["samples"][0]["value"][0]);
    let closed: f64 = (1..=200).map(|n| (0.2f64.powi(n) + 0.3f64.powi(n)) / (1.0 + 0.06 * n as f64)).sum();
    assert!((value - closed).abs() < 1e-4);
}

#[test]
fn sum_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    report(p, &["witness", "--kind", "poincare", "--trunc", "40", "--out", "f.json"]);
    report(p, &["sum", "--series", "f.json", "--level", "1,1,1", "--point", "0.2,0.3", "--point", "0.1+0.1i,0.2", "--csv", "s.csv"]);
    let csv = fs::read_to_string(p.join("s.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "re_x1,im_x1,re_x2,im_x2,re_value,im_value,tail_bound");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("1.0000000000000001e-1,1.0000000000000001e-1,"));

    report(p, &["sum", "--series", "f.json", "--level", "1,1,1", "--csv", "empty.csv"]);
    assert_eq!(fs::read_to_string(p.join("empty.csv")).unwrap(), "re_x1,im_x1,re_x2,im_x2,re_value,im_value,tail_bound\n");
}

#[test]
fn singular_direction_of_the_poincare_series() {
    let dir = tempfile::tempdir().unwrap();
    report(dir.path(), &["witness", "--kind", "poincare", "--trunc", "40", "--out", "f.json"]);
    let r = report(dir.path(), &["singular", "--series", "f.json", "--level", "1,1,1", "--point", "0.2,0.3"]);
    let dirs: Vec<f64> = r["result"]["directions"].as_array().unwrap().iter().map(num).collect();
    assert!(dirs.iter().any(|d| (d.abs() - std::f64::consts::PI).abs() < 0.1), "{dirs:?}");
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    report(p, &["witness", "--kind", "euler", "--trunc", "30", "--out", "e.json"]);
    let a = summtool(p, &["gevrey", "--series", "e.json", "--monomial", "1,1"]);
    let b = summtool(p, &["gevrey", "--series", "e.json", "--monomial", "1,1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    report(p, &["witness", "--kind", "poincare", "--trunc", "40", "--out", "f.json"]);
    let cfg = json!({
        "summation": { "quadrature": { "nodes": 32 } },
        "params": { "series": "f.json", "level": "1,1,1", "points": ["0.2,0.3"] },
    });
    write(p, "run.json", &cfg);
    let r = report(p, &["sum", "--config", "run.json", "--nodes", "48"]);
    assert_eq!(r["config"]["summation"]["quadrature"]["nodes"], 48);
    assert_eq!(r["config"]["summation"]["pade"], json!([18, 18]));
    assert_eq!(r["result"]["samples"].as_array().unwrap().len(), 1);
    let r = report(p, &["sum", "--config", "run.json"]);
    assert_eq!(r["config"]["summation"]["quadrature"]["nodes"], 32);
}

#[test]
fn factorial_solution_in_rational_mode() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = json!([
        { "alpha": [0], "series": { "trunc": 31, "terms": [{ "n": 1, "m": 0, "re": -1 }] } },
        { "alpha": [1], "series": { "trunc": 31, "terms": [{ "n": 0, "m": 0, "re": 1 }] } },
    ]);
    let sys = json!({ "exponents": [1, 1, 1, 1], "dim": 1, "trunc": 31, "f1": f1, "f2": [] });
    write(dir.path(), "sys.json", &sys);
    let r = report(dir.path(), &["pfaffian", "solve", "--system", "sys.json", "--side", "1", "--mode", "rational"]);
    let terms = r["result"]["solution"]["terms"].as_array().unwrap();
    let at = |n: u64| terms.iter().find(|t| t["n"] == n + 1 && t["m"] == n).map(|t| t["re"].clone());
    assert_eq!(at(15), Some(json!(1_307_674_368_000i64)));
    assert_eq!(at(5), Some(json!(120)));
    assert_eq!(r["result"]["residual_valuation"], Value::Null);
}

#[test]
fn integrability_check_and_pullback() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "even.json", &closing_system([1, 1, 1, 1], 2, 10));
    write(p, "uneven.json", &closing_system([1, 2, 1, 1], 2, 10));
    let r = report(p, &["pfaffian", "check", "--system", "even.json", "--mode", "rational"]);
    assert_eq!(r["result"]["integrable"], true);
    assert_eq!(r["result"]["spectral"]["case"], "EigenPairing");
    let r = report(p, &["pfaffian", "check", "--system", "uneven.json"]);
    assert_eq!(r["result"]["integrable"], false);
    assert_eq!(r["result"]["residual_valuation"], 2);

    for map in ["pi1^1", "pi2^1"] {
        report(p, &["pfaffian", "pullback", "--system", "even.json", "--map", map, "--out", "pulled.json"]);
        let pulled: Value = serde_json::from_str(&fs::read_to_string(p.join("pulled.json")).unwrap()).unwrap();
        assert_eq!(pulled["result"]["integrable_after"], true);
        let r = report(p, &["pfaffian", "check", "--system", "pulled.json"]);
        assert_eq!(r["result"]["integrable"], true);
    }
    let r = report(p, &["pfaffian", "pullback", "--system", "even.json", "--map", "pi1^2"]);
    assert_eq!(r["result"]["system"]["exponents"], json!([1, 3, 1, 3]));
}

#[test]
fn rank_reduction_of_a_proportional_pair() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let matrix = |entries: Value| json!({ "trunc": 10, "shape": [2, 2], "terms": [{ "n": 0, "m": 0, "entries": entries }] });
    write(p, "a.json", &matrix(json!([{ "re": 1 }, { "re": 2 }, { "re": 0 }, { "re": 3 }])));
    write(p, "b.json", &matrix(json!([{ "re": "2/3" }, { "re": "4/3" }, { "re": 0 }, { "re": 2 }])));
    let r = report(p, &["pfaffian", "reduce", "--exponents", "3,2,3,2", "--A", "a.json", "--B", "b.json", "--mode", "rational"]);
    assert_eq!(r["result"]["residual_zero"], true);
    assert_eq!(r["result"]["reduced"]["a_tilde"]["shape"], json!([6, 6]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // Zero linear part: domain error.
    let f = json!([{ "alpha": [0], "series": { "trunc": 6, "terms": [] } }]);
    write(p, "flat.json", &json!({ "exponents": [1, 1, 1, 1], "dim": 1, "trunc": 6, "f1": f, "f2": f, "d_y": 1 }));
    let out = summtool(p, &["pfaffian", "solve", "--system", "flat.json"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular linear part"));

    report(p, &["witness", "--kind", "poincare", "--trunc", "40", "--out", "f.json"]);
    let out = summtool(p, &["sum", "--series", "f.json", "--level", "1,1,1", "--point", "0.2,0.3", "--direction", "3.1"]);
    assert_eq!(out.status.code(), Some(1));

    let out = summtool(p, &["gevrey", "--series", "missing.json", "--monomial", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = summtool(p, &["gevrey", "--series", "f.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--monomial"));
    let out = summtool(p, &["sum", "--series", "f.json", "--level", "1,1,1", "--nodes", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = summtool(p, &["decompose", "--series", "f.json", "--monomial", "1,1", "--csv", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = summtool(p, &["levels", "--candidate", "1,1,0", "--components", "1,1,1"]);
    assert_eq!(out.status.code(), Some(2));
}
