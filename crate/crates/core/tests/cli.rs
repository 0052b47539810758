//! End-to-end checks of the command-line interface.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permcycles"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("permcycles-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn sample_formats() {
    let cycles = stdout(&["sample", "--weights", "ewens:2", "--n", "9", "--count", "4", "--seed", "3"]);
    assert_eq!(cycles.lines().count(), 4);
    for line in cycles.lines() {
        assert!(line.starts_with("(1"), "{line}");
    }
    let again = stdout(&["sample", "--weights", "ewens:2", "--n", "9", "--count", "4", "--seed", "3"]);
    assert_eq!(cycles, again);

    let oneline = stdout(&["sample", "--weights", "uniform", "--n", "5", "--format", "oneline"]);
    let mut values: Vec<usize> = oneline.split_whitespace().map(|v| v.parse().unwrap()).collect();
    values.sort();
    assert_eq!(values, vec![1, 2, 3, 4, 5]);
}

#[test]
fn stats_header_and_rows() {
    let out = stdout(&["stats", "--weights", "uniform", "--n", "30", "--count", "5", "--emit", "counts,ranges,fixed", "--k-max", "3"]);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "C_1,C_2,C_3,r_2,r_3,R_2,R_3,m,M,delta,Delta");
    assert_eq!(lines.count(), 5);
    assert!(!run(&["stats", "--weights", "uniform", "--n", "3", "--emit", "bogus"]).status.success());
}

#[test]
fn limit_and_exact_tables() {
    let cdf = stdout(&["limit", "cdf", "--law", "M", "--params", "theta=2", "--grid", "0:0.5:0.5"]);
    let rows: Vec<&str> = cdf.lines().collect();
    assert_eq!(rows[0], "x,F");
    let f0: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    let f_half: f64 = rows[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((f0 - (-2.0f64).exp()).abs() < 1e-15);
    assert!((f_half - (-1.0f64).exp()).abs() < 1e-15);

    let lap = stdout(&["limit", "laplace", "--k", "1", "--theta", "1", "--t", "1"]);
    let v: f64 = lap.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - (-(-1.0f64).exp()).exp()).abs() < 1e-15);

    let exact = stdout(&["exact", "--weights", "ewens:2", "--n", "2", "--statistic", "C_1"]);
    assert_eq!(exact.lines().collect::<Vec<_>>(), vec!["C_1,probability", "0,0.3333333333333333", "2,0.6666666666666666"]);

    assert!(!run(&["exact", "--weights", "uniform", "--n", "9", "--statistic", "C_1"]).status.success());
    assert!(!run(&["limit", "cdf", "--law", "minrange", "--params", "theta=1", "--grid", "0:1:0.5"]).status.success());
    let bad = run(&["sample", "--weights", "poly:1", "--n", "3"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("poly:1"));
}

#[test]
fn experiment_outputs_are_worker_independent() {
    let config = scratch("avoid.cfg");
    std::fs::write(
        &config,
        "experiment=avoidance\nweights=uniform\nn=200\nreplicates=500\nseed=4\nboxes=box:k=1;0,0.5;box:k=2;0,1;0.5,1\n",
    )
    .unwrap();
    let mut jsons = Vec::new();
    for workers in ["1", "8"] {
        let json = scratch(&format!("report-{workers}.json"));
        let csv = scratch(&format!("raw-{workers}.csv"));
        let summary = stdout(&[
            "experiment", "--config", config.to_str().unwrap(), "--json", json.to_str().unwrap(),
            "--csv", csv.to_str().unwrap(), "--workers", workers,
        ]);
        assert!(summary.contains("avoidance"));
        let raw = std::fs::read_to_string(&csv).unwrap();
        assert_eq!(raw.lines().next().unwrap(), "n,replicate,count_in_U");
        assert_eq!(raw.lines().count(), 501);
        jsons.push(std::fs::read(&json).unwrap());
    }
    assert_eq!(jsons[0], jsons[1]);
    let parsed: serde_json::Value = serde_json::from_slice(&jsons[0]).unwrap();
    assert_eq!(parsed["experiment"], "avoidance");
}
