use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphere-energy"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect()
}

#[test]
fn gen_fixture_and_fibonacci() {
    let dir = tempfile::tempdir().unwrap();
    let oct = ok(dir.path(), &["gen", "--family", "octahedron"]);
    assert_eq!(data_rows(&oct).len(), 6);
    let fib = ok(dir.path(), &["gen", "--family", "fibonacci", "--n", "500"]);
    let rows = data_rows(&fib);
    assert_eq!(rows.len(), 500);
    for r in rows {
        assert!((r.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn gen_uniform_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--family", "uniform", "--n", "100", "--seed", "7"];
    assert_eq!(ok(dir.path(), &args), ok(dir.path(), &args));
    let other = ok(dir.path(), &["gen", "--family", "uniform", "--n", "100", "--seed", "8"]);
    assert_ne!(ok(dir.path(), &args), other);
}

fn certified_t(dir: &Path, family: &str, t: &str) -> i64 {
    ok(dir, &["gen", "--family", family, "--out", "pts.txt"]);
    let v: Value = serde_json::from_str(&ok(dir, &["certify", "--in", "pts.txt", "--t", t])).unwrap();
    v["result"]["certificate"]["certified_t"].as_i64().unwrap()
}

#[test]
fn certify_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(certified_t(dir.path(), "octahedron", "4"), 3);
    assert_eq!(certified_t(dir.path(), "icosahedron", "6"), 5);

    ok(dir.path(), &["gen", "--family", "uniform", "--n", "30", "--seed", "1", "--out", "r.txt"]);
    let v: Value = serde_json::from_str(&ok(dir.path(), &["certify", "--in", "r.txt", "--t", "2"])).unwrap();
    let cert = &v["result"]["certificate"];
    assert_eq!(cert["certified_t"], 0);
    let defects = cert["defects"].as_array().unwrap();
    assert!(defects.iter().any(|x| x.as_f64().unwrap() > 0.0));
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn energy_examples() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "--family", "octahedron", "--out", "o.txt"]);
    let v: Value =
        serde_json::from_str(&ok(dir.path(), &["energy", "--in", "o.txt", "--metric", "riesz", "--s", "1"])).unwrap();
    let e = v["result"]["value"].as_f64().unwrap();
    assert!((e - (12.0 / 2f64.sqrt() + 1.5)).abs() < 1e-12);
    let v: Value = serde_json::from_str(&ok(
        dir.path(),
        &["energy", "--in", "o.txt", "--metric", "kernel", "--coeffs", "1"],
    ))
    .unwrap();
    assert_eq!(v["result"]["value"].as_f64().unwrap(), 1.0);
}

#[test]
fn single_point_wce_matches_series() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("one.txt"), "0 0 1\n").unwrap();
    let v: Value = serde_json::from_str(&ok(
        dir.path(),
        &["energy", "--in", "one.txt", "--metric", "wce-sobolev", "--s", "2", "--tol", "1e-10"],
    ))
    .unwrap();
    // sum over l >= 1 of (1 + l(l+1))^{-2} (2l + 1), summed far past the tolerance
    let oracle: f64 = (1..2_000_000u64)
        .rev()
        .map(|l| {
            let l = l as f64;
            (2.0 * l + 1.0) / (1.0 + l * (l + 1.0)).powi(2)
        })
        .sum();
    let got = v["result"]["wce_squared"].as_f64().unwrap();
    assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
}

#[test]
fn experiment_rerun_from_embedded_config_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "experiment", "--family", "jittered", "--metric", "kernel-offdiag", "--s", "1", "--n-list",
            "16,32,64", "--trials", "5", "--seed", "42", "--out", "a.csv",
        ],
    );
    ok(dir.path(), &["experiment", "--from", "a.csv", "--out", "b.csv"]);
    ok(dir.path(), &["experiment", "--from", "a.csv", "--threads", "1", "--out", "c.csv"]);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a, std::fs::read(dir.path().join("c.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# config: "));
    assert!(text.contains(&format!("# sphere-energy {}", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn every_command_reruns_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--family", "jittered", "--n", "50", "--seed", "3", "--out", "g1.txt"]);
    ok(d, &["gen", "--from", "g1.txt", "--out", "g2.txt"]);
    ok(d, &["certify", "--in", "g1.txt", "--t", "3", "--out", "c1.json"]);
    ok(d, &["certify", "--from", "c1.json", "--out", "c2.json"]);
    ok(d, &["energy", "--in", "g1.txt", "--metric", "wce-logspace", "--gamma", "1", "--tol", "1e-6", "--out", "e1.json"]);
    ok(d, &["energy", "--from", "e1.json", "--out", "e2.json"]);
    ok(d, &["experiment", "--family", "fibonacci", "--metric", "riesz", "--s", "1", "--n-list", "20,40,80,160", "--out", "t.csv"]);
    ok(d, &["fit", "--in", "t.csv", "--leading", "auto", "--out", "f1.json"]);
    ok(d, &["fit", "--from", "f1.json", "--out", "f2.json"]);
    ok(d, &["compare", "--in", "t.csv", "--in", "t.csv", "--out", "r1.txt"]);
    ok(d, &["compare", "--from", "r1.txt", "--out", "r2.txt"]);
    for (a, b) in [("g1.txt", "g2.txt"), ("c1.json", "c2.json"), ("e1.json", "e2.json"), ("f1.json", "f2.json"), ("r1.txt", "r2.txt")] {
        assert_eq!(std::fs::read(d.join(a)).unwrap(), std::fs::read(d.join(b)).unwrap(), "{a}");
    }
}

#[test]
fn plan_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.plan"),
        "# fibonacci riesz sweep\nfamily = fibonacci\nmetric = riesz\ns = 1\nn-list = 10, 20\n",
    )
    .unwrap();
    let csv = ok(dir.path(), &["experiment", "--plan", "sweep.plan", "--n-list", "30,40,50"]);
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("30,"));
}

#[test]
fn fit_recovers_riesz_exponent() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["experiment", "--family", "fibonacci", "--metric", "riesz", "--s", "1", "--n-list", "128,256,512,1024,2048", "--out", "t.csv"],
    );
    let v: Value = serde_json::from_str(&ok(dir.path(), &["fit", "--in", "t.csv", "--leading", "auto"])).unwrap();
    let slope = v["fit"]["result"]["slope"].as_f64().unwrap();
    assert!((slope - 1.5).abs() < 0.15, "{slope}");
}

#[test]
fn identical_tables_compare_as_comparable() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["experiment", "--family", "fibonacci", "--metric", "riesz", "--s", "1", "--n-list", "20,40,80,160", "--out", "t.csv"],
    );
    let text = ok(dir.path(), &["compare", "--in", "t.csv", "--in", "t.csv"]);
    assert!(text.contains("verdict: comparable"));
    let v: Value = serde_json::from_str(&ok(dir.path(), &["compare", "--in", "t.csv", "--in", "t.csv", "--format", "json"])).unwrap();
    assert_eq!(v["report"]["verdict"], "comparable");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(d, &["gen"]).status.code(), Some(1));
    assert_eq!(run(d, &["gen", "--family", "dodecagon", "--n", "3"]).status.code(), Some(1));
    assert_eq!(run(d, &["--help"]).status.code(), Some(0));
    ok(d, &["gen", "--family", "octahedron", "--out", "o.txt"]);
    assert_eq!(run(d, &["energy", "--in", "o.txt", "--metric", "riesz", "--s", "-1"]).status.code(), Some(2));
    assert_eq!(run(d, &["energy", "--in", "o.txt", "--metric", "wce-sobolev", "--s", "0.5"]).status.code(), Some(2));
    assert_eq!(run(d, &["energy", "--in", "missing.txt", "--metric", "riesz", "--s", "1"]).status.code(), Some(3));
    std::fs::write(d.join("bad.txt"), "1 0 0\n0 1 zero\n").unwrap();
    assert_eq!(run(d, &["energy", "--in", "bad.txt", "--metric", "riesz", "--s", "1"]).status.code(), Some(3));
    let dup = "1 0 0\n1 0 0\n";
    std::fs::write(d.join("dup.txt"), dup).unwrap();
    assert_eq!(run(d, &["energy", "--in", "dup.txt", "--metric", "riesz", "--s", "1"]).status.code(), Some(2));
}
