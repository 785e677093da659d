use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use w2a::harness::test_seeds;
use w2a::gridworld::EnvKind;

fn w2a(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_w2a"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, env: EnvKind, body: &str) -> PathBuf {
    let seeds: Vec<String> = test_seeds(env)[..4].iter().map(u64::to_string).collect();
    let text = format!(
        r#"{{"env_kind": "{}", "test_seeds": [{}], "output_dir": "out", {body}}}"#,
        env.name(),
        seeds.join(", ")
    );
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const ALWAYS: &str = r#""mediator": {"policy": "always"}, "planner": {"kind": "oracle"}"#;

const TINY_TRAIN: &str = r#""mediator": {"policy": "learned"}, "planner": {"kind": "oracle"},
    "ppo": {"iterations": 2, "steps_per_iteration": 64, "minibatch_size": 32, "epochs": 1, "eval_interval": 1},
    "network": {"conv": [2, 2, 2], "hidden": [8, 8]}, "training_seeds": [3]"#;

#[test]
fn eval_writes_report_and_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", EnvKind::SimpleDoorKey, ALWAYS);
    let o = w2a(&["eval", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("out/eval-always/episodes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("env,policy,train_seed,repetition,env_seed,success"));
    assert!(tmp.path().join("out/eval-always/report.json").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("over 4 episodes"));
}

#[test]
fn malformed_config_exits_2_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", EnvKind::SimpleDoorKey, &ALWAYS.replace("oracle", "psychic"));
    let o = w2a(&["eval", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("psychic"), "{}", stderr(&o));

    let cfg = write_config(tmp.path(), "d.json", EnvKind::SimpleDoorKey, &format!(r#"{ALWAYS}, "ppo": {{"clip": -1.0}}"#));
    let o = w2a(&["eval", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("ppo.clip"), "{}", stderr(&o));

    let o = w2a(&["eval", "--config", "missing.json"], tmp.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn unreadable_checkpoint_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", EnvKind::SimpleDoorKey, ALWAYS);
    std::fs::write(tmp.path().join("junk.ckpt"), b"not a checkpoint").unwrap();
    let o = w2a(
        &["eval", "--config", cfg.to_str().unwrap(), "--policy", "learned", "--checkpoint", "junk.ckpt"],
        tmp.path(),
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn compare_across_env_kinds_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), "a.json", EnvKind::SimpleDoorKey, ALWAYS);
    let b = write_config(tmp.path(), "b.json", EnvKind::KeyInBox, ALWAYS);
    for (cfg, out) in [(&a, "ra"), (&b, "rb")] {
        assert_eq!(code(&w2a(&["eval", "--config", cfg.to_str().unwrap(), "--out", out], tmp.path())), 0);
    }
    let o = w2a(&["eval", "--config", a.to_str().unwrap(), "--policy", "never", "--out", "rn"], tmp.path());
    assert_eq!(code(&o), 0);

    let o = w2a(&["compare", "ra/report.json", "rn/report.json", "--out", "table.md"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = std::fs::read_to_string(tmp.path().join("table.md")).unwrap();
    assert!(table.contains("always (ra)") && table.contains("never (rn)"));

    let o = w2a(&["compare", "ra/report.json", "rb/report.json"], tmp.path());
    assert_eq!(code(&o), 4);
}

#[test]
fn busy_port_exits_5() {
    let tmp = tempfile::tempdir().unwrap();
    let script = tmp.path().join("s.json");
    std::fs::write(&script, r#"{"rules": []}"#).unwrap();
    let holder = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = holder.local_addr().unwrap().port().to_string();
    let o = w2a(&["mock-llm", "--script", script.to_str().unwrap(), "--port", &port], tmp.path());
    assert_eq!(code(&o), 5, "{}", stderr(&o));
}

#[test]
fn render_prints_one_block_per_step() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", EnvKind::SimpleDoorKey, ALWAYS);
    let seed = test_seeds(EnvKind::SimpleDoorKey)[0].to_string();
    let o = w2a(&["render", "--config", cfg.to_str().unwrap(), "--seed", &seed], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let steps = text.lines().filter(|l| l.starts_with("t=")).count();
    assert!(steps > 0);
    assert_eq!(text.lines().filter(|l| *l == "decision: ask").count(), steps);
    assert_eq!(text.lines().filter(|l| l.starts_with("translation: ")).count(), steps);
    assert!(text.lines().last().unwrap().starts_with("result: success"));

    let o = w2a(&["render", "--config", cfg.to_str().unwrap(), "--seed", &seed, "--policy", "hard_coded"], tmp.path());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().filter(|l| *l == "decision: not ask").count() > 0);
}

#[test]
fn training_is_reproducible_and_checkpoints_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "t.json", EnvKind::SimpleDoorKey, TINY_TRAIN);
    let o = w2a(&["train", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let curves = std::fs::read_to_string(tmp.path().join("out/curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 3);
    let fin = tmp.path().join("out/checkpoints/asker-seed3-final.ckpt");
    let first = std::fs::read(&fin).unwrap();
    assert!(tmp.path().join("out/checkpoints/asker-seed3-best.ckpt").exists());

    assert_eq!(code(&w2a(&["train", "--config", cfg.to_str().unwrap()], tmp.path())), 0);
    assert_eq!(std::fs::read_to_string(tmp.path().join("out/curves.csv")).unwrap(), curves);
    assert_eq!(std::fs::read(&fin).unwrap(), first);

    let o = w2a(&["eval", "--config", cfg.to_str().unwrap(), "--checkpoint", "out"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = std::fs::read_to_string(tmp.path().join("out/eval-learned/report.json")).unwrap();
    assert!(report.contains("\"checkpoint_ids\""));
    let csv = std::fs::read_to_string(tmp.path().join("out/eval-learned/episodes.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("3")));
}

#[test]
fn training_with_a_fixed_policy_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", EnvKind::SimpleDoorKey, ALWAYS);
    assert_eq!(code(&w2a(&["train", "--config", cfg.to_str().unwrap()], tmp.path())), 2);
}
