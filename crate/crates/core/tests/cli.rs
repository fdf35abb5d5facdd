use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gap"))
        .args(args)
        .env("GAP_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const FORCED: &str = r#"{"s":1,"t":2,"cost":[[5,7]],"a_demand":[2],"a_capacity":[2],"b_demand":[1,1],"b_capacity":[1,1]}"#;

#[test]
fn solve_forced_instance() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "i.json", FORCED);
    for algo in ["ga", "lca", "flow", "brute"] {
        let out = gap(&["solve", "--algorithm", algo, inst.to_str().unwrap()]);
        if algo == "lca" {
            assert_eq!(out.status.code(), Some(1), "demands are not unit");
            continue;
        }
        assert_eq!(
            out.status.code(),
            Some(0),
            "{algo}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v = json(&out);
        assert_eq!(v["total_cost"], 12);
        assert_eq!(v["feasible"], true);
        assert_eq!(v["algorithm"], algo);
    }
}

#[test]
fn solve_output_verifies() {
    let dir = TempDir::new().unwrap();
    for seed in 0..5 {
        let gen = gap(&["gen", "--s", "4", "--t", "5", "--seed", &seed.to_string()]);
        let inst = write(
            dir.path(),
            "i.json",
            &String::from_utf8(gen.stdout).unwrap(),
        );
        let solved = gap(&["solve", inst.to_str().unwrap()]);
        let asg = write(
            dir.path(),
            "a.json",
            &String::from_utf8(solved.stdout).unwrap(),
        );
        let out = gap(&[
            "verify",
            inst.to_str().unwrap(),
            "--assignment",
            asg.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out)["feasible"], true);
    }
}

#[test]
fn verify_reports_violation() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "i.json", FORCED);
    let asg = write(dir.path(), "a.json", r#"{"pairs":[[0,0]]}"#);
    let out = gap(&[
        "verify",
        inst.to_str().unwrap(),
        "--assignment",
        asg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["feasible"], false);
    assert_eq!(v["degree_violations"].as_array().unwrap().len(), 2);

    let wrong_cost = write(
        dir.path(),
        "b.json",
        r#"{"pairs":[[0,0],[0,1]],"total_cost":11}"#,
    );
    let out = gap(&[
        "verify",
        inst.to_str().unwrap(),
        "--assignment",
        wrong_cost.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["cost_matches"], false);
}

#[test]
fn parse_errors() {
    let dir = TempDir::new().unwrap();
    let missing = write(
        dir.path(),
        "m.json",
        r#"{"s":1,"t":1,"cost":[[1]],"a_demand":[1],"a_capacity":[1],"b_capacity":[1]}"#,
    );
    let out = gap(&["solve", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b_demand"));

    let ragged = write(
        dir.path(),
        "r.json",
        r#"{"s":2,"t":2,"cost":[[1,2],[3]],"a_demand":[1,1],"a_capacity":[1,1],"b_demand":[1,1],"b_capacity":[1,1]}"#,
    );
    let out = gap(&["solve", ragged.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Shape"));

    let out = gap(&["solve", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(gap(&["--help"]).status.code(), Some(0));
}

#[test]
fn infeasible_exit_status() {
    let dir = TempDir::new().unwrap();
    let sums = write(
        dir.path(),
        "s.json",
        r#"{"s":1,"t":1,"cost":[[1]],"a_demand":[1],"a_capacity":[1],"b_demand":[0],"b_capacity":[0]}"#,
    );
    let out = gap(&["solve", sums.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Σα > Σβ′"));

    // Passes every necessary check, still infeasible: a_1 and a_2 both need
    // b_1, which accepts one partner.
    let hidden = write(
        dir.path(),
        "h.json",
        r#"{"s":3,"t":2,"cost":[[1,1],[1,1],[1,1]],"a_demand":[2,2,0],"a_capacity":[2,2,0],"b_demand":[0,0],"b_capacity":[1,3]}"#,
    );
    let check = gap(&["solve", "--algorithm", "brute", hidden.to_str().unwrap()]);
    assert!(!String::from_utf8_lossy(&check.stderr).contains("violates"));
    for algo in ["ga", "flow"] {
        let out = gap(&["solve", "--algorithm", algo, hidden.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{algo}");
    }
}

#[test]
fn gen_and_diff_are_deterministic() {
    let a = gap(&[
        "gen",
        "--s",
        "5",
        "--t",
        "3",
        "--seed",
        "11",
        "--demands-one",
    ]);
    let b = gap(&[
        "gen",
        "--s",
        "5",
        "--t",
        "3",
        "--seed",
        "11",
        "--demands-one",
    ]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["a_demand"], serde_json::json!([1, 1, 1, 1, 1]));

    let args = [
        "diff", "--trials", "50", "--seed", "7", "--max-s", "3", "--max-t", "3",
    ];
    let (x, y) = (gap(&args), gap(&args));
    assert_eq!(x.status.code(), Some(0));
    assert_eq!(x.stdout, y.stdout);
    let lines: Vec<_> = String::from_utf8(x.stdout)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(lines.len(), 51);
    let summary: serde_json::Value = serde_json::from_str(lines.last().unwrap()).unwrap();
    assert_eq!(summary["disagreements"], 0);
}

#[test]
fn bench_reports_slope() {
    let out = gap(&[
        "bench",
        "--algorithm",
        "hungarian",
        "--sizes",
        "5,10,20",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["claimed_exponent"], 3);
    assert_eq!(text.lines().count(), 4);
}
