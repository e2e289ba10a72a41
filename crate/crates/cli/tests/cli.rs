use std::path::Path;
use std::process::{Command, Output};

fn qubitflip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qubitflip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn design_check_exit_codes() {
    let ok = qubitflip(&["design-check", "--set", "pauli", "--tol", "1e-12"]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("unitary 1-design: yes"));

    let haar = qubitflip(&["design-check", "--set", "haar:100000", "--tol", "0.02", "--seed", "7"]);
    assert_eq!(code(&haar), 0);

    assert_eq!(code(&qubitflip(&["design-check", "--set", "bogus"])), 2);
    assert_eq!(code(&qubitflip(&["design-check", "--set", "haar:0"])), 2);
    assert_eq!(code(&qubitflip(&["design-check", "--set", "printed"])), 4);
}

#[test]
fn scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let out = qubitflip(&[
        "scan-j", "--min", "0", "--max", "10", "--steps", "101", "--n", "2", "--T", "1", "--out", path_str(&csv),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "J,bob_mean_payoff");
    assert_eq!(lines[1], "0.000000000000,0.500000000000");
    assert_eq!(lines.len(), 102);

    let log = qubitflip(&["scan-j", "--min", "100", "--max", "10000", "--steps", "50", "--scale", "log"]);
    assert_eq!(code(&log), 0);
    assert_eq!(stdout(&log).lines().count(), 51);
}

#[test]
fn scan_usage_and_io_errors() {
    assert_eq!(code(&qubitflip(&["scan-j", "--min", "0", "--max", "1", "--steps", "1"])), 2);
    assert_eq!(code(&qubitflip(&["scan-j", "--min", "0", "--max", "1", "--steps", "5", "--scale", "log"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("curve.csv");
    let out = qubitflip(&["scan-j", "--min", "0", "--max", "1", "--steps", "3", "--out", path_str(&bad)]);
    assert_eq!(code(&out), 3);
}

#[test]
fn find_fair_coupling_prints_six_decimals() {
    let out = qubitflip(&["find-fair-j", "--n", "2", "--T", "1", "--tol", "1e-6"]);
    assert_eq!(code(&out), 0);
    let line = stdout(&out);
    let line = line.trim();
    assert_eq!(line.split('.').nth(1).unwrap().len(), 6, "{line}");
    let j: f64 = line.parse().unwrap();
    assert!((j - 4.10469).abs() < 5e-3);
}

#[test]
fn find_fair_coupling_failures() {
    assert_eq!(code(&qubitflip(&["find-fair-j", "--n", "3", "--T", "1"])), 4);
    assert_eq!(code(&qubitflip(&["find-fair-j", "--tol", "0"])), 2);
    assert_eq!(code(&qubitflip(&["find-fair-j", "--tol", "-1"])), 2);
}

#[test]
fn optimize_is_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &Path| {
        vec![
            "optimize".to_string(),
            "--player".into(),
            "alice".into(),
            "--n".into(),
            "2".into(),
            "--J".into(),
            "4.10469".into(),
            "--N".into(),
            "3".into(),
            "--restarts".into(),
            "5".into(),
            "--seed".into(),
            "1".into(),
            "--out".into(),
            path_str(p).to_string(),
        ]
    };
    let run = |p: &Path| {
        let owned = args(p);
        let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
        qubitflip(&refs)
    };
    assert_eq!(code(&run(&a)), 0);
    assert_eq!(code(&run(&b)), 0);
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());

    let json: serde_json::Value = serde_json::from_slice(&text).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["player"], "alice");
    assert_eq!(json["controls"].as_array().unwrap().len(), 6);
    let payoff = json["payoff"].as_f64().unwrap();
    assert!(payoff > 0.9);

    let replay = qubitflip(&["play", "chain", "--controls", path_str(&a)]);
    assert_eq!(code(&replay), 0);
    let replayed: f64 = stdout(&replay)
        .lines()
        .find_map(|l| l.strip_prefix("replayed payoff: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((replayed - payoff).abs() < 1e-10);
}

#[test]
fn optimize_rejects_bad_arguments() {
    assert_eq!(code(&qubitflip(&["optimize", "--player", "carol"])), 2);
    assert_eq!(code(&qubitflip(&["optimize", "--player", "bob", "--n", "0", "--J", "1"])), 2);
    assert_eq!(code(&qubitflip(&["optimize", "--player", "bob", "--n", "9", "--J", "1"])), 2);
}

#[test]
fn play_chain_rejects_bad_controls() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema_version\": 1, \"player\": ").unwrap();
    assert_eq!(code(&qubitflip(&["play", "chain", "--controls", path_str(&bad)])), 2);
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&qubitflip(&["play", "chain", "--controls", path_str(&missing)])), 3);
}

#[test]
fn play_transcripts() {
    let meyer = qubitflip(&["play", "demo-meyer"]);
    assert_eq!(code(&meyer), 0);
    assert!(stdout(&meyer).contains("p_alice = 1.000000000000"));

    let single = qubitflip(&["play", "single", "--alice", "pauli", "--bob", "pauli", "--samples", "exhaustive"]);
    assert_eq!(code(&single), 0);
    assert!(stdout(&single).contains("alice: mean payoff 0.500000000000"));

    let mc = qubitflip(&["play", "single", "--alice", "haar", "--bob", "pauli", "--samples", "2000", "--seed", "4"]);
    assert_eq!(code(&mc), 0);
    assert_eq!(stdout(&mc), stdout(&qubitflip(&[
        "play", "single", "--alice", "haar", "--bob", "pauli", "--samples", "2000", "--seed", "4",
    ])));

    assert_eq!(code(&qubitflip(&["play", "single", "--alice", "haar", "--samples", "exhaustive"])), 2);
    assert_eq!(code(&qubitflip(&["play", "single", "--bob", "euler:1,2"])), 2);

    let chain = qubitflip(&["play", "chain", "--n", "2", "--J", "4.10469"]);
    assert_eq!(code(&chain), 0);
    let p: f64 = stdout(&chain)
        .lines()
        .find_map(|l| l.strip_prefix("bob: mean payoff "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((p - 0.5).abs() < 1e-5);
}
