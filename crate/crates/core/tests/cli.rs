use std::process::{Command, Output};

use serde_json::Value;

fn chandelier(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chandelier")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn positive_roots(v: &Value) -> Vec<f64> {
    v["positive"].as_array().unwrap().iter().map(|p| p["x"].as_f64().unwrap()).collect()
}

#[test]
fn three_published_fixed_points() {
    let v = json_of(&chandelier(&["fixed-points", "--J", "-1", "--Jp", "29", "--Jsl", "5.3", "--T", "68"]));
    let xs = positive_roots(&v);
    assert_eq!(xs.len(), 3);
    for (x, e) in xs.iter().zip([0.127421, 1.11525, 7.40762]) {
        assert!((x - e).abs() < 1e-3, "{x} vs {e}");
    }
    assert!(v["T_star"].is_number() && v["T_double_star"].is_number());
    assert!(v["descartes"].is_object());
    assert_eq!(v["roots"].as_array().unwrap().len(), 4);
}

#[test]
fn free_model_has_root_one() {
    let v = json_of(&chandelier(&["fixed-points", "--J", "0", "--Jp", "0", "--Jsl", "0", "--T", "1"]));
    let xs = positive_roots(&v);
    assert_eq!(xs.len(), 1);
    assert!((xs[0] - 1.0).abs() < 1e-12);
}

#[test]
fn consistency_residual_is_tiny() {
    let v = json_of(&chandelier(&["verify-consistency", "--J", "1", "--Jp", "1", "--Jsl", "1", "--T", "2", "--depth", "2"]));
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["per_sigma"].as_array().unwrap().len(), 16);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| chandelier(args).status.code().unwrap();
    assert_eq!(code(&["verify-consistency", "--J", "1", "--Jp", "1", "--Jsl", "1", "--T", "2", "--depth", "3"]), 3);
    assert_eq!(code(&["fixed-points", "--J", "1", "--Jp", "1", "--Jsl", "1", "--T", "-1"]), 2);
    assert_eq!(code(&["lattice-stats", "--depth", "-1"]), 2);
    assert_eq!(code(&["lattice-stats", "--depth", "11"]), 3);
    assert_eq!(code(&["no-such-command"]), 64);
    assert_eq!(code(&["fixed-points", "--bogus", "1"]), 64);
    assert_eq!(code(&["iterate", "--J", "1", "--Jp", "1", "--Jsl", "1", "--T", "1", "--x0", "0"]), 2);
}

#[test]
fn phase_scan_csv_layout() {
    let out = chandelier(&[
        "phase-scan", "--J", "-1", "--Jp", "29", "--Jsl", "5.3", "--T", "60:80:3", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "J,Jp,Jsl,T,n_positive,transition,classes,T_star,T_double_star,formula_agrees"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == 10));
    assert_eq!(rows[1][3], "70.0");
    let t68 = chandelier(&["phase-scan", "--J", "-1", "--Jp", "29", "--Jsl", "5.3", "--T", "68", "--format", "csv"]);
    let t68 = String::from_utf8(t68.stdout).unwrap();
    let row: Vec<&str> = t68.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[4..7], ["3", "true", "stable;unstable;stable"]);
}

#[test]
fn iterate_csv_reaches_fixed_point() {
    let out = chandelier(&[
        "iterate", "--J", "-1", "--Jp", "29", "--Jsl", "5.3", "--T", "68", "--x0", "5", "--steps", "500", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,x,f_x");
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[2] - 7.40762).abs() < 1e-3, "{last:?}");
}

#[test]
fn output_is_deterministic() {
    let args = ["verify-consistency", "--J", "0.3", "--Jp", "-1.2", "--Jsl", "0.8", "--T", "1.5", "--seed", "17"];
    let a = chandelier(&args);
    let b = chandelier(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let scan = ["phase-scan", "--J", "-2:2:5", "--Jp", "-1:3:5", "--Jsl", "0.5", "--T", "0.5:4:4"];
    assert_eq!(chandelier(&scan).stdout, chandelier(&scan).stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let scan = ["phase-scan", "--J", "-2:2:5", "--Jp", "-1:3:5", "--Jsl", "0.5", "--T", "0.5:4:4", "--format", "csv"];
    let one = Command::new(env!("CARGO_BIN_EXE_chandelier")).env("CHANDELIER_THREADS", "1").args(scan).output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_chandelier")).env("CHANDELIER_THREADS", "4").args(scan).output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"J": -1, "Jp": 29, "Jsl": 5.3, "T": 68}"#).unwrap();
    let from_file = chandelier(&["fixed-points", "--config", cfg.to_str().unwrap()]);
    let from_flags = chandelier(&["fixed-points", "--J", "-1", "--Jp", "29", "--Jsl", "5.3", "--T", "68"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_flags.stdout);

    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"{"J": -1, "Jp": 29, "Jsl": 5.3, "T": "60:80:3", "format": "csv"}"#).unwrap();
    let a = chandelier(&["phase-scan", "--config", grid.to_str().unwrap()]);
    let b = chandelier(&["phase-scan", "--J", "-1", "--Jp", "29", "--Jsl", "5.3", "--T", "60:80:3", "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"J": 1, "temperature": 2}"#).unwrap();
    assert_eq!(chandelier(&["fixed-points", "--config", bad.to_str().unwrap()]).status.code(), Some(64));
}

#[test]
fn output_path_and_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.json");
    let edges = dir.path().join("edges.txt");
    let out = chandelier(&[
        "lattice-stats", "--depth", "2", "--edges", edges.to_str().unwrap(), "--output", stats.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(v["vertices"], 13);
    assert_eq!(v["nn_edges"], 12);
    let text = std::fs::read_to_string(&edges).unwrap();
    let count = |label: &str| text.lines().filter(|l| l.starts_with(label)).count();
    assert_eq!((count("NN "), count("SLNN "), count("PNNN ")), (12, 12, 9));
}

#[test]
fn numbers_have_at_most_nine_significant_digits() {
    let out = chandelier(&["fixed-points", "--J", "-1", "--Jp", "29", "--Jsl", "5.3", "--T", "68", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for field in text.lines().skip(1).flat_map(|l| l.split(',').take(2).collect::<Vec<_>>()) {
        let mantissa = field.split('e').next().unwrap();
        let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        assert!(digits.trim_start_matches('0').len() <= 9, "{field}");
    }
}
