use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], cache: &Path, envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_restart-grade"));
    cmd.args(args).env("RESTART_GRADE_CACHE", cache);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value of `column` in the first data row of a CSV report.
fn field(csv: &str, column: &str) -> f64 {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == column).unwrap();
    row[i].parse().unwrap()
}

fn error_json(o: &Output) -> Value {
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(err.lines().last().unwrap()).unwrap()
}

#[test]
fn grade_on_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["grade", "--d", "1", "--x", "3", "--L", "64"],
        dir.path(),
        &[],
    );
    assert!(o.status.success());
    let out = stdout(&o);
    assert!((field(&out, "grade") - 12.0).abs() < 1e-6, "{out}");
    assert!(out.contains(",12.0000000000,"), "{out}");
}

#[test]
fn brownian_grade_on_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["bm", "--d", "1", "--r0", "1", "--x", "3"],
        dir.path(),
        &[],
    );
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "grade"), 4.0);
}

#[test]
fn unit_disk() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["disk", "--R", "1", "--x0", "1,0"], dir.path(), &[]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!((field(&out, "exact") - 1.0).abs() < 1e-9);
    assert_eq!(field(&out, "upper"), 8.0);
}

#[test]
fn warm_cache_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let report = |name: &str| {
        let path = dir.path().join(name);
        let o = run(
            &[
                "disk",
                "--R",
                "6",
                "--x0",
                "2,0",
                "--x0",
                "3,0",
                "--out",
                path.to_str().unwrap(),
            ],
            &cache,
            &[],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(path).unwrap()
    };
    let first = report("a.csv");
    let second = report("b.csv");
    assert_eq!(first, second);
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(summary["command"], "disk");
    assert!(summary["timings"]["total_seconds"].is_number());

    // A corrupted table is rebuilt and gives the same report.
    let table = fs::read_dir(&cache)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "csv"))
        .unwrap();
    let text = fs::read_to_string(&table).unwrap();
    fs::write(&table, text.replacen("value\n", "value\n9,9,9\n", 1)).unwrap();
    assert_eq!(report("c.csv"), first);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"d": 1, "x": [4], "L": 40}"#).unwrap();
    let o = run(
        &["grade", "--config", cfg.to_str().unwrap(), "--x", "2"],
        dir.path(),
        &[],
    );
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(field(&out, "L"), 40.0);
    assert!((field(&out, "grade") - 6.0).abs() < 1e-6);

    fs::write(&cfg, r#"{"d": 1, "bogus": 1}"#).unwrap();
    let o = run(
        &["grade", "--config", cfg.to_str().unwrap(), "--x", "2"],
        dir.path(),
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["kind"], "config");
}

#[test]
fn mc_requires_a_seed_and_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["mc", "--x", "3,0"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_json(&o)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("--seed"));

    let args = [
        "mc",
        "--x",
        "4,1",
        "--seed",
        "9",
        "--replicates",
        "500",
        "--strategy",
        "optimal",
        "--strategy",
        "euclidean:5",
    ];
    let one = run(&args, dir.path(), &[("RESTART_GRADE_THREADS", "1")]);
    let three = run(&args, dir.path(), &[("RESTART_GRADE_THREADS", "3")]);
    assert!(one.status.success() && three.status.success());
    assert_eq!(one.stdout, three.stdout);
    assert!(stdout(&one).starts_with("strategy,mean,std_error,"));
}

#[test]
fn numeric_errors_carry_their_module() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["grade", "--x", "0,0"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_json(&o);
    assert_eq!(e["error"]["kind"], "invalid-input");
    assert!(e["error"]["module"].is_string());
}

#[test]
fn verify_continuum_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = run(
        &["verify", "continuum", "--out", out.to_str().unwrap()],
        dir.path(),
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("suite,name,measured,relation,threshold,pass\n"));
    assert!(!csv.contains(",false\n"));
    let o = run(&["verify", "nonsense"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}
