use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nftgame"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(&run(args))).unwrap()
}

#[test]
fn analyze_outputs_match_golden_files() {
    let cases: [(&str, &[&str]); 6] = [
        ("analyze_envelope.json", &["analyze", "envelope", "--up", "2", "--down", "0.5", "--prob", "0.5"]),
        ("analyze_arbitrage.json", &["analyze", "arbitrage", "--capital", "100", "--growth", "0.05", "--cost", "5"]),
        ("analyze_sharpe.json", &["analyze", "sharpe", "--excess", "0.05", "--vol", "0.2", "--horizon", "4"]),
        (
            "analyze_allocate.json",
            &["analyze", "allocate", "--mean", "0.1,0.08", "--riskless", "0.02", "--vol", "0.2,0;0,0.3"],
        ),
        ("analyze_propitious.json", &["analyze", "propitious", "--seeker-exponent", "8"]),
        (
            "analyze_lattice.json",
            &["analyze", "lattice", "--breeds-remaining", "2", "--floor", "1", "--child-value", "2", "--costs", "1.5,1.5"],
        ),
    ];
    for (file, args) in cases {
        assert_eq!(stdout(&run(args)), golden(file), "{file}");
    }
}

#[test]
fn analyze_values() {
    let env = json(&["analyze", "envelope", "--up", "2", "--down", "0.5", "--prob", "0.5"]);
    assert_eq!(env["gain_player1"], 0.25);
    assert_eq!(env["gain_player2"], 0.25);
    let arb = json(&["analyze", "arbitrage", "--capital", "100", "--growth", "0.05", "--cost", "5"]);
    assert_eq!(arb["kind"], "NoArbitrage");
    let long = json(&["analyze", "arbitrage", "--capital", "100", "--growth", "0.1", "--cost", "5"]);
    assert_eq!(long["kind"], "LongBreedingArbitrage");
    let sharpe = json(&["analyze", "sharpe", "--excess", "0.05", "--vol", "0.2", "--horizon", "4"]);
    assert!((sharpe["sharpe_ratio"].as_f64().unwrap() - 0.125).abs() < 1e-12);
    let weak = json(&["analyze", "propitious", "--seeker-exponent", "2"]);
    assert_eq!(weak["propitious"], false);
}

#[test]
fn analyze_rejects_bad_numbers() {
    for args in [
        &["analyze", "sharpe", "--mean", "abc", "--vol", "0.2"][..],
        &["analyze", "sharpe", "--mean", "0.1", "--vol", "inf"],
        &["analyze", "sharpe", "--mean", "0.1", "--vol", "0"],
        &["analyze", "envelope", "--up", "-1", "--down", "0.5"],
        &["analyze", "allocate", "--mean", "0.1", "--vol", "0.2,x"],
        &["analyze", "lattice", "--breeds-remaining", "3", "--floor", "1", "--child-value", "2", "--costs", "1"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn demos_print_reference_tables() {
    assert_eq!(stdout(&run(&["demo", "babylon-lottery"])), golden("demo_babylon_lottery.txt"));
    let env = stdout(&run(&["demo", "two-envelopes"]));
    assert!(env.contains("+25.00%") && !env.contains("MISMATCH"));
    let col = stdout(&run(&["demo", "collateral-cycle"]));
    assert!(col.contains("200.000000") && !col.contains("MISMATCH"));
    let a = stdout(&run(&["demo", "minority", "--seed", "5"]));
    assert_eq!(a, stdout(&run(&["--seed", "5", "demo", "minority"])));
    assert_ne!(a, stdout(&run(&["demo", "minority"])));
    assert!(!a.contains("MISMATCH"));
    assert_eq!(run(&["demo", "three-envelopes"]).status.code(), Some(2));
}

#[test]
fn passive_simulation_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = root().join("scenarios/passive.json");
    let out = run(&["simulate", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    stdout(&out);
    let csv = std::fs::read_to_string(dir.path().join("snapshots.csv")).unwrap();
    assert_eq!(csv, golden("passive_snapshots.csv"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows.iter().all(|r| r.split_once(',').unwrap().1 == rows[0].split_once(',').unwrap().1));
    assert_eq!(std::fs::read_to_string(dir.path().join("summary.json")).unwrap(), golden("passive_summary.json"));
}

#[test]
fn simulate_flags_override_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let config = root().join("scenarios/mixed.json");
    let out_dir = dir.path().join("o");
    let args = ["--seed", "9", "simulate", "--config", config.to_str().unwrap(), "--steps", "5", "--out", out_dir.to_str().unwrap()];
    stdout(&run(&args));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 9);
    assert_eq!(summary["steps"], 5);
    let csv = std::fs::read_to_string(out_dir.join("snapshots.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn missing_config_exits_2_with_path() {
    let out = run(&["simulate", "--config", "/no/such/scenario.json", "--out", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/scenario.json"));
}

#[test]
fn bad_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(root().join("scenarios/passive.json"))
        .unwrap()
        .replace("\"floor_price\"", "\"flor_price\"");
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text).unwrap();
    let out = run(&["simulate", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("run.board") && err.contains("flor_price"), "{err}");
}

#[test]
fn invalid_values_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = root().join("scenarios/passive.json");
    let out = run(&["simulate", "--config", config.to_str().unwrap(), "--steps", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
