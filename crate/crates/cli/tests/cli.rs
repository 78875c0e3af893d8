use std::path::PathBuf;
use std::process::{Command, Output};

fn puflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_puflab")).args(args).output().expect("binary runs")
}

fn scratch_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("puflab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn demo_prints_transcript_and_events() {
    let dir = scratch_dir("demo");
    let o = puflab(&["demo", "extpuf", "--seed", "4", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for header in ["# transcript", "# events", "# outcome Success", "pufs=2 exchange_phases=2"] {
        assert!(out.contains(header), "{header} missing");
    }
    assert!(std::fs::read_to_string(dir.join("events.jsonl")).unwrap().lines().count() > 0);
    assert!(dir.join("transcript.jsonl").exists());
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn demo_is_deterministic() {
    let a = puflab(&["demo", "collextpuf", "--seed", "9"]);
    let b = puflab(&["demo", "collextpuf", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn attack_reproduces() {
    let o = puflab(&["attack", "original-extpuf", "--trials", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("successes    20"));
}

#[test]
fn costs_of_the_compat_mode() {
    let o = puflab(&["costs", "uccompiler-compat", "--n", "4", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[PASS]"));
}

#[test]
fn experiment_writes_report_to_out() {
    let dir = scratch_dir("experiment");
    let cfg = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/fe.toml");
    let o = puflab(&["experiment", cfg.to_str().unwrap(), "--trials", "100", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(json.contains("\"trials\": 100"));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn failed_check_exits_one() {
    let dir = scratch_dir("threshold");
    let cfg = dir.join("tq.toml");
    std::fs::write(
        &cfg,
        "version = 1\n\n[experiment]\nkind = \"tq\"\nadversary = \"puf-substituter\"\ntrials = 50\nseed = 1\nthreshold = 1.1\n\n[params]\nn = 32\n",
    )
    .unwrap();
    let o = puflab(&["experiment", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL]"));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn bad_config_exits_two_with_field_paths() {
    let dir = scratch_dir("bad");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "version = 1\n\n[experiment]\nkind = \"fe\"\ntrials = 0\nseed = 1\n\n[params]\nn = 16\nk = 12\n").unwrap();
    let o = puflab(&["experiment", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("experiment.trials") && err.contains("params.k"), "{err}");

    assert_eq!(puflab(&["experiment", dir.join("absent.toml").to_str().unwrap()]).status.code(), Some(2));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn unknown_adversary_exits_two() {
    let o = puflab(&["props", "tq", "--adversary", "nobody"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown adversary `nobody`"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(puflab(&["demo", "not-a-protocol"]).status.code(), Some(2));
    assert_eq!(puflab(&[]).status.code(), Some(2));
}
