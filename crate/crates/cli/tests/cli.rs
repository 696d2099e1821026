use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn bsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn compute_to(input: &Path, dir: &Path) -> PathBuf {
    let rec = dir.join("record.json");
    let out = bsa(&["compute", path_str(input), "--out", path_str(&rec)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    rec
}

#[test]
fn werner_weight_and_verdict() {
    let out = bsa(&["compute", path_str(&data("werner_08.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["lambda"].as_f64().unwrap() - 0.3).abs() < 1e-9);
    assert_eq!(v["path"], "full_rank");
    assert_eq!(v["verification"]["verdict"], true);
    assert!((v["concurrence"].as_f64().unwrap() - 0.7).abs() < 1e-12);
}

#[test]
fn maximally_mixed_is_separable() {
    let v = json(&bsa(&["compute", path_str(&data("identity_quarter.json"))]));
    assert_eq!(v["lambda"].as_f64().unwrap(), 1.0);
    assert_eq!(v["path"], "separable");
    assert!(v["psi"].is_null());
}

#[test]
fn malformed_matrix_names_the_field() {
    let out = bsa(&["compute", path_str(&data("malformed_3x3.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("matrix"), "{err}");
}

#[test]
fn non_hermitian_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(
        &std::fs::read_to_string(data("werner_08.json")).unwrap(),
    )
    .unwrap();
    v["matrix"][0][1] = serde_json::json!([0.1, 0.0]);
    let p = dir.path().join("bad.json");
    std::fs::write(&p, v.to_string()).unwrap();
    assert_eq!(bsa(&["compute", path_str(&p)]).status.code(), Some(2));
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(
        &std::fs::read_to_string(data("bell.json")).unwrap(),
    )
    .unwrap();
    v["extra"] = Value::Bool(true);
    let p = dir.path().join("extra.json");
    std::fs::write(&p, v.to_string()).unwrap();
    let out = bsa(&["compute", path_str(&p)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extra"));
}

#[test]
fn compute_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("werner_08.json");
    let rec = compute_to(&input, dir.path());
    let out = bsa(&["verify", path_str(&input), path_str(&rec)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], true);
}

fn tampered(input: &Path, dir: &Path, edit: impl FnOnce(&mut Value)) -> Output {
    let rec = compute_to(input, dir);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&rec).unwrap()).unwrap();
    edit(&mut v);
    let bad = dir.join("tampered.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    bsa(&["verify", path_str(input), path_str(&bad)])
}

#[test]
fn verify_rejects_shifted_weight() {
    let dir = tempfile::tempdir().unwrap();
    let out = tampered(&data("werner_08.json"), dir.path(), |v| {
        let l = v["lambda"].as_f64().unwrap();
        v["lambda"] = serde_json::json!(l + 0.01);
    });
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["verdict"], false);
}

#[test]
fn verify_rejects_orthogonal_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let s = 0.5f64.sqrt();
    let out = tampered(&data("werner_08.json"), dir.path(), |v| {
        v["psi"] = serde_json::json!([[s, 0.0], [0.0, 0.0], [0.0, 0.0], [-s, 0.0]]);
    });
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bell_concurrence_is_one() {
    let v = json(&bsa(&["concurrence", path_str(&data("bell.json"))]));
    assert!((v["concurrence"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn werner_spectra() {
    let out = bsa(&["spectra", path_str(&data("werner_08.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let d4 = v["d"][3].as_f64().unwrap();
    assert!((d4 - 0.7).abs() < 1e-10, "{d4}");
    assert_eq!(v["phi4"].as_array().unwrap().len(), 4);
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn random_then_compute_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    let out = bsa(&["random", "--rank", "3", "--seed", "7", "--out", path_str(&state)]);
    assert_eq!(out.status.code(), Some(0));
    let again = bsa(&["random", "--rank", "3", "--seed", "7"]);
    assert_eq!(std::fs::read(&state).unwrap(), again.stdout);

    let a = json(&bsa(&["compute", path_str(&state)]));
    let b = json(&bsa(&["compute", path_str(&state)]));
    assert_eq!(without_timings(a.clone()), without_timings(b));
    assert_eq!(a["verification"]["verdict"], true);
}

#[test]
fn random_rank_out_of_range() {
    let out = bsa(&["random", "--rank", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_agrees_on_werner() {
    let out = bsa(&["oracle-compare", path_str(&data("werner_08.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["difference"].as_f64().unwrap() < 1e-4);
}

#[test]
fn oracle_tolerance_is_enforced() {
    let out = bsa(&[
        "oracle-compare",
        path_str(&data("werner_08.json")),
        "--tol",
        "0",
        "--oracle-starts",
        "20",
    ]);
    // the oracle only approaches the optimum from the feasible side
    assert_eq!(out.status.code(), Some(4));
}

fn numbers(v: &Value, out: &mut Vec<f64>) {
    match v {
        Value::Number(n) => out.push(n.as_f64().unwrap()),
        Value::Array(items) => items.iter().for_each(|x| numbers(x, out)),
        Value::Object(map) => map.values().for_each(|x| numbers(x, out)),
        _ => {}
    }
}

#[test]
fn floats_survive_a_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    bsa(&["random", "--rank", "4", "--seed", "3", "--out", path_str(&state)]);
    let rec = compute_to(&state, dir.path());
    let text = std::fs::read_to_string(&rec).unwrap();
    let mut xs = Vec::new();
    numbers(&serde_json::from_str(&text).unwrap(), &mut xs);
    assert!(xs.len() > 40);
    for x in xs {
        if x.fract() != 0.0 {
            assert!(text.contains(&format!("{x:.16e}")), "{x:e} does not reprint");
        }
    }
}

#[test]
fn table_format_lists_keys() {
    let out = bsa(&["concurrence", path_str(&data("bell.json")), "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("concurrence")));
}
