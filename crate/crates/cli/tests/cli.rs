use std::path::Path;
use std::process::{Command, Output};

use regretplan::fixtures::{t3, FIG1_GRID};
use regretplan::model::{ModelJson, Pkwts};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regretplan")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_kind(o: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(v["message"].is_string());
    v["error"].as_str().unwrap().to_string()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fig1.grid"), FIG1_GRID).unwrap();
    std::fs::write(dir.path().join("t3.json"), serde_json::to_string_pretty(&t3().to_json()).unwrap()).unwrap();
    dir
}

#[test]
fn grid_then_solve_prints_the_regret_value() {
    let dir = setup();
    let d = dir.path();
    stdout(&cli(d, &["grid", "fig1.grid", "-o", "fig1.json"]));
    assert_eq!(stdout(&cli(d, &["solve", "fig1.json", "--task", "F f", "-o", "s.json"])), "2\n");
    assert_eq!(stdout(&cli(d, &["regret", "s.json", "fig1.json"])), "2\n");
    assert_eq!(stdout(&cli(d, &["solve", "fig1.json", "--task", "F f", "--objective", "worst", "-o", "w.json"])), "10\n");
    assert_eq!(stdout(&cli(d, &["regret", "w.json", "fig1.json"])), "7\n");
    let oracle: serde_json::Value = serde_json::from_str(&stdout(&cli(d, &["oracle", "fig1.json", "--task", "F f"]))).unwrap();
    assert_eq!(oracle["value"], 2);
    assert!(oracle["checked"].as_u64().unwrap() > 0);
}

#[test]
fn fully_known_model_has_zero_regret() {
    let dir = setup();
    let d = dir.path();
    // Fixing the door open leaves a known model whose best route costs 2.
    stdout(&cli(d, &["sample", "t3.json", "--p", "0", "-o", "open.json"]));
    assert_eq!(stdout(&cli(d, &["solve", "open.json", "--task", "F target", "-o", "s.json"])), "0\n");
    let run: serde_json::Value = serde_json::from_str(&stdout(&cli(d, &["exec", "s.json", "open.json", "open.json"]))).unwrap();
    assert_eq!(run["cost"], 2);
    assert_eq!(run["path"], serde_json::json!([0, 1, 3]));
}

#[test]
fn strategy_files_replay_identically() {
    let dir = setup();
    let d = dir.path();
    stdout(&cli(d, &["solve", "t3.json", "--task", "F target", "-o", "s.json"]));
    stdout(&cli(d, &["sample", "t3.json", "--p", "1", "-o", "closed.json"]));
    let first = stdout(&cli(d, &["exec", "s.json", "t3.json", "closed.json"]));
    let second = stdout(&cli(d, &["exec", "s.json", "t3.json", "closed.json"]));
    assert_eq!(first, second);
    let run: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!((run["cost"].as_u64(), run["satisfied"].as_bool()), (Some(12), Some(true)));
}

#[test]
fn model_json_round_trips() {
    let dir = setup();
    let d = dir.path();
    stdout(&cli(d, &["generate", "--n-states", "12", "--seed", "4", "-o", "g.json"]));
    let text = std::fs::read_to_string(d.join("g.json")).unwrap();
    let j: ModelJson = serde_json::from_str(&text).unwrap();
    let m = Pkwts::from_json(&j).unwrap();
    assert_eq!(m.to_json(), j);
    assert_eq!(serde_json::to_string_pretty(&m.to_json()).unwrap() + "\n", text);
}

#[test]
fn exit_codes() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(cli(d, &["--help"]).status.code(), Some(0));
    let o = cli(d, &["solve", "t3.json", "--task", "F target", "--objective", "cheapest"]);
    assert_eq!((o.status.code(), error_kind(&o)), (Some(2), "Usage".to_string()));
    let o = cli(d, &["bench", "--p", "0:2:0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cli(d, &["solve", "t3.json", "--task", "F nowhere"]);
    assert_eq!((o.status.code(), error_kind(&o)), (Some(1), "UnrealizableTask".to_string()));
    let o = cli(d, &["solve", "t3.json", "--task", "G target"]);
    assert_eq!(o.status.code(), Some(1));
    stdout(&cli(d, &["generate", "--n-states", "6", "--seed", "1", "-o", "other.json"]));
    stdout(&cli(d, &["sample", "other.json", "--p", "0.5", "-o", "other_env.json"]));
    stdout(&cli(d, &["solve", "t3.json", "--task", "F target", "-o", "s.json"]));
    let o = cli(d, &["exec", "s.json", "t3.json", "other_env.json"]);
    assert_eq!((o.status.code(), error_kind(&o)), (Some(1), "IncompatibleEnvironment".to_string()));
    // A model where an environment is expected.
    let o = cli(d, &["exec", "s.json", "t3.json", "t3.json"]);
    assert_eq!((o.status.code(), error_kind(&o)), (Some(1), "InvalidModel".to_string()));
    let o = cli(d, &["grid", "missing.grid"]);
    assert_eq!((o.status.code(), error_kind(&o)), (Some(1), "Io".to_string()));
}

#[test]
fn bench_csv_layout() {
    let dir = setup();
    let out = stdout(&cli(dir.path(), &["bench", "--states", "12", "--p", "0,1", "--trials", "8", "--seed", "2"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "states,p,trial_count,strategy,mean_cost,stderr,skips");
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[1].starts_with("12,0.00,") && lines[1].contains(",regret,"));
    assert!(lines[6].starts_with("12,1.00,") && lines[6].contains(",best,"));
}
