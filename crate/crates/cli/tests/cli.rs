use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn anneal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anneal")).env_remove("ANNEAL_SEED").args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = anneal(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn analyze(name: &str) -> Value {
    serde_json::from_str(&stdout(&["analyze", "--landscape", data(name).to_str().unwrap()])).unwrap()
}

/// Rows of a report as field vectors, header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn find<'a>(rows: &'a [Vec<String>], variant: &str, metric: &str) -> Vec<&'a Vec<String>> {
    rows.iter().filter(|r| r[1] == variant && r[2] == metric).collect()
}

/// Compares against a golden file; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

#[test]
fn analyze_reports_hill_constants() {
    let l3 = analyze("l3.json");
    assert_eq!(l3["hill_constants"]["c_M1"], 1.0);
    assert_eq!(l3["hill_constants"]["c_M2"], 0.0);
    assert_eq!(l3["gap_bound"]["A"], 0.25);
    let l5 = analyze("l5.json");
    assert_eq!(l5["hill_constants"]["c_M1"], 3.0);
    assert_eq!(l5["hill_constants"]["c_M2"], 2.0);
}

#[test]
fn analyze_matches_golden() {
    let l3 = data("l3.json");
    let text = stdout(&["analyze", "--landscape", l3.to_str().unwrap(), "--schedule", "log:c=1"]);
    check_golden("analyze_l3.json", &text);
}

#[test]
fn simulate_matches_golden() {
    let l5 = data("l5.json");
    let text = stdout(&[
        "simulate", "--landscape", l5.to_str().unwrap(), "--schedule", "power:alpha=0.5", "--x0", "s2",
        "--checkpoints", "1,10", "--replicas", "50", "--seed", "0x2a",
    ]);
    check_golden("simulate_l5.csv", &text);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\": ").unwrap();
    assert_eq!(anneal(&["analyze", "--landscape", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(anneal(&["analyze", "--landscape", missing.to_str().unwrap()]).status.code(), Some(2));
    let l3 = data("l3.json");
    let zero = anneal(&["simulate", "--landscape", l3.to_str().unwrap(), "--schedule", "log:c=1", "--x0", "s0", "--t1", "1", "--replicas", "0"]);
    assert_eq!(zero.status.code(), Some(2));
    let unknown = anneal(&["simulate", "--landscape", l3.to_str().unwrap(), "--schedule", "log:c=1", "--x0", "nowhere", "--t1", "1"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn unrepresentable_rates_exit_3() {
    let l5 = data("l5.json");
    let out = anneal(&[
        "simulate", "--landscape", l5.to_str().unwrap(), "--schedule", "const:t=0.001", "--x0", "s2",
        "--t1", "1", "--replicas", "1", "--engine", "uniformized", "--variant", "m2",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn zero_horizon_stays_at_the_start() {
    let l3 = data("l3.json");
    let text = stdout(&["simulate", "--landscape", l3.to_str().unwrap(), "--schedule", "log:c=1", "--x0", "s2", "--t1", "0", "--replicas", "1"]);
    let rows = rows(&text);
    for variant in ["m1", "m2"] {
        assert_eq!(find(&rows, variant, "occupancy:s2")[0][3], "1.0");
        assert_eq!(find(&rows, variant, "occupancy:s0")[0][3], "0.0");
    }
}

#[test]
fn seeds_reproduce_output() {
    let l3 = data("l3.json");
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, file: &str| {
        let path = dir.path().join(file);
        let out = anneal(&[
            "simulate", "--landscape", l3.to_str().unwrap(), "--schedule", "log:c=1", "--x0", "s2", "--t1", "20",
            "--replicas", "200", "--seed", seed, "--out", path.to_str().unwrap(),
            "--trajectory", dir.path().join(format!("{file}.path")).to_str().unwrap(),
        ]);
        assert!(out.status.success());
        (std::fs::read(&path).unwrap(), std::fs::read(dir.path().join(format!("{file}.path"))).unwrap())
    };
    assert_eq!(run("7", "a.csv"), run("7", "b.csv"));
    assert_ne!(run("7", "a.csv").0, run("8", "c.csv").0);
}

#[test]
fn boosted_chain_misses_less_on_l3() {
    let l3 = data("l3.json");
    let text = stdout(&[
        "simulate", "--landscape", l3.to_str().unwrap(), "--schedule", "power:alpha=0.5", "--x0", "s2", "--t1", "100",
        "--replicas", "400", "--seed", "3",
    ]);
    let rows = rows(&text);
    let miss = |v| find(&rows, v, "miss_probability")[0][3].parse::<f64>().unwrap();
    assert!(miss("m2") < miss("m1"), "m2 {} m1 {}", miss("m2"), miss("m1"));
}

#[test]
fn bounds_rows_carry_reasons() {
    let l5 = data("l5.json");
    let text = stdout(&["bounds", "--landscape", l5.to_str().unwrap(), "--x0", "s0", "--t1", "50", "--replicas", "100"]);
    let rows5 = rows(&text);
    let miss = find(&rows5, "m2", "miss_probability")[0];
    assert_eq!(miss[7], "true");
    assert!(miss[6].parse::<f64>().unwrap() > 0.0);

    let l3 = data("l3.json");
    let text = stdout(&["bounds", "--landscape", l3.to_str().unwrap(), "--schedule", "log:c=1", "--x0", "s2", "--t1", "10", "--replicas", "50"]);
    let miss = rows(&text).into_iter().find(|r| r[2] == "miss_probability").unwrap();
    assert_eq!((miss[6].as_str(), miss[7].as_str(), miss[8].as_str()), ("NA", "false", "c_M2 ≤ 0"));

    let plateau = data("plateau.json");
    let text = stdout(&["bounds", "--landscape", plateau.to_str().unwrap(), "--schedule", "log:c=1", "--x0", "s1", "--t1", "10", "--replicas", "50"]);
    let stay = rows(&text).into_iter().find(|r| r[1] == "m1" && r[2] == "stay_probability").unwrap();
    assert_eq!((stay[6].as_str(), stay[8].as_str()), ("NA", "delta ≤ 0"));
}

#[test]
fn bounds_without_a_schedule_needs_one_when_the_bound_is_unavailable() {
    let l3 = data("l3.json");
    let out = anneal(&["bounds", "--landscape", l3.to_str().unwrap(), "--x0", "s2", "--t1", "10"]);
    assert_eq!(out.status.code(), Some(2));
}
