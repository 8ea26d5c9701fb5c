use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use socnet_harness::{builtin, Check};

const BIN: &str = env!("CARGO_BIN_EXE_socnet-sim");

const CONFIG: &str = r#"
horizon = 200
seed = 5
replication_count = 3

[[profiles]]
alpha_same = 1.0
alpha_diff = 1.0
link_cost = 0.3
opportunism = 0.5
pop_share = SHARE
curve = { family = "sqrt-like", scale = 1.0 }

[[profiles]]
alpha_same = 1.0
alpha_diff = 1.0
link_cost = 0.22
opportunism = 0.5
pop_share = 0.5
curve = { family = "sqrt-like", scale = 1.0 }
"#;

fn sim(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).env("SOCNET_OUT_DIR", out).output().expect("binary runs")
}

fn write_config(dir: &Path, share: &str) -> String {
    let path = dir.join("society.toml");
    fs::write(&path, CONFIG.replace("SHARE", share)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_writes_tables_and_replication_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), "0.5");
    let run = sim(&["simulate", "--config", &config, "--betweenness"], &out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    for file in [
        "metrics.csv",
        "bonding.csv",
        "betweenness.csv",
        "eft_pmf.csv",
        "summary.json",
        "replication0_edges.csv",
        "replication0_events.csv",
        "replication0_agents.json",
    ] {
        assert!(out.join(file).is_file(), "missing {file}");
    }
    let echo = String::from_utf8_lossy(&run.stderr);
    assert!(echo.contains("L*(0)"), "{echo}");
}

#[test]
fn invalid_config_exits_with_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "0.9");
    let run = sim(&["simulate", "--config", &config], &dir.path().join("out"));
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("pop_share"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_preset_and_usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sim(&["preset", "no-such-preset"], dir.path()).status.code(), Some(2));
    assert_eq!(sim(&["simulate"], dir.path()).status.code(), Some(2));
}

#[test]
fn failed_verification_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut preset = builtin("eeft").unwrap();
    preset.name = "strict".into();
    preset.society.horizon = 300;
    preset.society.replication_count = 2;
    preset.checkpoints = vec![300];
    preset.measures.eft_cohort = Some([50, 280]);
    preset.oracles.retain(|s| matches!(s.check, Check::Eeft { .. }));
    if let Check::Eeft { rel_tol, .. } = &mut preset.oracles[0].check {
        *rel_tol = 1e-12;
    }
    let path = dir.path().join("strict.json");
    fs::write(&path, serde_json::to_string(&preset).unwrap()).unwrap();
    let run = sim(&["verify", path.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(run.status.code(), Some(1), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("FAIL criterion 2"));
    assert!(dir.path().join("out/oracles.csv").is_file());
}

#[test]
fn list_names_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let run = sim(&["list"], dir.path());
    assert!(run.status.success());
    let text = String::from_utf8_lossy(&run.stdout);
    for name in socnet_harness::builtin_names() {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn oracle_prints_in_regime_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "0.5");
    let run = sim(&["oracle", "--config", &config], dir.path());
    assert!(run.status.success());
    let preds: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    let names: Vec<&str> = preds.as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"type0.eft"));
    assert!(!names.contains(&"type0.eeft"));
}
