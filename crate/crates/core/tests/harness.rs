use std::path::PathBuf;

use proptest::prelude::*;
use puflab::harness::*;
use puflab::protocols::{DeskConfig, ProtocolId};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("puflab-harness-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn field_paths(e: ConfigError) -> Vec<String> {
    match e {
        ConfigError::Invalid(fields) => fields.into_iter().map(|f| f.path).collect(),
        other => panic!("expected field errors, got {other}"),
    }
}

const MINIMAL: &str = r#"
version = 1

[experiment]
kind = "completeness"
protocol = "extpuf"
trials = 10
seed = 3

[params]
n = 16
"#;

#[test]
fn minimal_config_fills_defaults() {
    let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
    let r = cfg.validate().unwrap();
    assert_eq!(r.kind, ExperimentKind::Completeness);
    assert_eq!(r.protocol, Some(ProtocolId::Extpuf));
    assert_eq!((cfg.params.k, cfg.params.n_coll), (1, 1));
    assert_eq!(r.desk.n, 16);
}

#[test]
fn validation_reports_every_bad_field() {
    let mut cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
    cfg.version = 7;
    cfg.experiment.trials = 0;
    cfg.params.k = 9;
    cfg.params.n_coll = 17;
    cfg.experiment.threshold = Some(-1.0);
    let paths = field_paths(cfg.validate().unwrap_err());
    for p in ["version", "experiment.trials", "params.k", "params.n_coll", "experiment.threshold"] {
        assert!(paths.iter().any(|q| q == p), "{p} missing from {paths:?}");
    }
}

#[test]
fn protocol_and_adversary_must_fit_the_kind() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Zoo, 16, 1, 1);
    cfg.experiment.protocol = Some("cpuf".into());
    assert_eq!(field_paths(cfg.validate().unwrap_err()), ["experiment.protocol"]);

    let mut cfg = ExperimentConfig::new(ExperimentKind::Attack, 16, 1, 1);
    cfg.experiment.protocol = Some("original-extpuf".into());
    cfg.experiment.adversary = Some("no-such-adversary".into());
    let e = cfg.validate().unwrap_err();
    assert!(e.to_string().contains("unknown adversary `no-such-adversary`"), "{e}");

    let mut cfg = ExperimentConfig::new(ExperimentKind::Completeness, 16, 1, 1);
    cfg.experiment.protocol = Some("nonsense".into());
    assert_eq!(field_paths(cfg.validate().unwrap_err()), ["experiment.protocol"]);
}

#[test]
fn only_zoo_varies_the_budget_and_events_are_restricted() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Fe, 16, 1, 1);
    cfg.budget.k_state = None;
    cfg.output.events = Some("e.jsonl".into());
    let paths = field_paths(cfg.validate().unwrap_err());
    assert_eq!(paths, ["budget", "output.events"]);
}

#[test]
fn unknown_fields_and_bad_syntax_are_parse_errors() {
    let text = MINIMAL.replace("seed = 3", "seed = 3\ncolour = \"blue\"");
    let e = ExperimentConfig::from_toml(&text).unwrap_err();
    assert!(matches!(e, ConfigError::Parse(_)));
    assert!(e.to_string().contains("colour"), "{e}");
    let e = ExperimentConfig::from_toml(&MINIMAL.replace("n = 16", "n = \"sixteen\"")).unwrap_err();
    assert!(matches!(e, ConfigError::Parse(_)));
    assert!(matches!(ExperimentConfig::load(&configs_dir().join("missing.toml")), Err(ConfigError::Io { .. })));
}

#[test]
fn toml_round_trip() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Zoo, 32, 100, 9);
    cfg.experiment.protocol = Some("collextpuf".into());
    cfg.experiment.adversary = Some("all".into());
    cfg.experiment.threshold = Some(0.0);
    cfg.params.k = 2;
    cfg.params.n_coll = 4;
    cfg.output.report = Some("out/r.json".into());
    let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back.to_toml(), cfg.to_toml());
    assert_eq!(back.validate().unwrap(), cfg.validate().unwrap());
}

#[test]
fn shipped_configs_load_and_validate() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 30, "only {seen} configs");
}

#[test]
fn every_kind_has_a_config() {
    let kinds: Vec<String> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| ExperimentConfig::load(&e.unwrap().path()).unwrap().experiment.kind)
        .collect();
    for k in ExperimentKind::ALL {
        assert!(kinds.iter().any(|c| c == k.id()), "no config for {k}");
    }
}

#[test]
fn completeness_uccompiler_hundred_trials() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Completeness, 16, 100, 1);
    cfg.experiment.protocol = Some("uccompiler".into());
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.successes, 100);
    assert!(r.passed());
}

#[test]
fn same_seed_gives_byte_identical_outputs() {
    let dir = scratch_dir("determinism");
    let run = |tag: &str| {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Completeness, 16, 20, 5);
        cfg.experiment.protocol = Some("collextpuf".into());
        cfg.params.n_coll = 3;
        cfg.params.k = 2;
        cfg.output.report = Some(dir.join(format!("{tag}.json")));
        cfg.output.events = Some(dir.join(format!("{tag}.events.jsonl")));
        let r = run_experiment(&cfg).unwrap();
        let events = std::fs::read(dir.join(format!("{tag}.events.jsonl"))).unwrap();
        (r.to_json(), std::fs::read(dir.join(format!("{tag}.json"))).unwrap(), events)
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert!(!a.2.is_empty());

    let mut cfg = ExperimentConfig::new(ExperimentKind::Hiding, 16, 200, 5);
    cfg.experiment.protocol = Some("extpuf".into());
    assert_eq!(run_experiment(&cfg).unwrap().to_json(), run_experiment(&cfg).unwrap().to_json());
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn different_seeds_give_different_event_logs() {
    let a = honest_run(ProtocolId::Extpuf, &DeskConfig::default(), 1, 1, true).unwrap();
    let b = honest_run(ProtocolId::Extpuf, &DeskConfig::default(), 1, 2, true).unwrap();
    assert_ne!(a.logs.unwrap().0, b.logs.unwrap().0);
}

#[test]
fn expected_cost_matches_measured() {
    for n in [8, 16] {
        let cfg = DeskConfig { n, ..DeskConfig::default() };
        for p in ProtocolId::ALL {
            let count = if p == ProtocolId::Collextpuf { 3 } else { 1 };
            let run = honest_run(p, &cfg, count, 11, false).unwrap();
            assert_eq!(run.outcome, Outcome::Success, "{p} n={n}");
            assert_eq!(run.cost, expected_cost(p, n), "{p} n={n}");
        }
    }
}

#[test]
fn costs_experiment_reports_the_compat_blowup() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Costs, 4, 2, 1);
    cfg.experiment.protocol = Some("uccompiler-compat".into());
    let r = run_experiment(&cfg).unwrap();
    assert!(r.passed(), "{}", r.table());
    assert_eq!(r.successes, 2);
}

/// Bisection on `(p_hat - p)^2 = z^2 p (1 - p) / n` over one side of `p_hat`.
fn wilson_root(k: u64, n: u64, upper: bool) -> f64 {
    let z = 1.959963984540054f64;
    let (nf, ph) = (n as f64, k as f64 / n as f64);
    let g = |p: f64| (ph - p).powi(2) - z * z * p * (1.0 - p) / nf;
    let (mut lo, mut hi) = if upper { (ph, 1.0) } else { (0.0, ph) };
    if g(if upper { hi } else { lo }) < 0.0 {
        return if upper { 1.0 } else { 0.0 };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // g is negative at p_hat and grows towards the boundary.
        let inside = g(mid) < 0.0;
        if upper == inside {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn wilson_matches_bisection_oracle() {
    for (k, n) in [(0, 1), (1, 1), (0, 1000), (3, 10), (50, 100), (999, 1000), (1, 10_000), (7, 13)] {
        let (lo, hi) = wilson_interval(k, n);
        assert!((lo - wilson_root(k, n, false)).abs() < 1e-9, "lo {k}/{n}");
        assert!((hi - wilson_root(k, n, true)).abs() < 1e-9, "hi {k}/{n}");
    }
    assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
}

proptest! {
    #[test]
    fn wilson_interval_is_inside_unit_and_holds_the_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(k, n);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn report_counters_add_up(outcomes in prop::collection::vec(0u8..5, 0..200)) {
        let mut r = ExperimentReport::new(ExperimentKind::Fe, 1, DeskConfig::default());
        for o in &outcomes {
            r.record(&match o {
                0 => Outcome::Success,
                1 => Outcome::Failure,
                k => Outcome::Abort(format!("step-{k}")),
            });
        }
        r.finish();
        prop_assert_eq!(r.successes + r.failures + r.abort_count(), r.trials);
        prop_assert_eq!(r.trials, outcomes.len() as u64);
        prop_assert!(r.interval.0 <= r.estimate && r.estimate <= r.interval.1);
    }
}

#[test]
fn run_counters_add_up_and_checks_are_named() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Zoo, 16, 20, 2);
    cfg.experiment.protocol = Some("extpuf".into());
    cfg.experiment.adversary = Some("all".into());
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.successes + r.failures + r.abort_count(), r.trials);
    assert!(r.checks.iter().any(|c| c.name == "no-extraction-violation"));
}

#[test]
fn outputs_are_written_where_asked() {
    let dir = scratch_dir("persist");
    let mut cfg = ExperimentConfig::new(ExperimentKind::Fe, 16, 50, 1);
    cfg.output.report = Some(dir.join("nested/report.json"));
    cfg.output.table = Some(dir.join("report.txt"));
    let r = run_experiment(&cfg).unwrap();
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("nested/report.json")).unwrap()).unwrap();
    assert_eq!(json["successes"], r.successes);
    assert_eq!(json["kind"], "fe");
    let table = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(table.starts_with("experiment   fe"));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn threshold_override_flips_the_verdict() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Tq, 32, 100, 1);
    cfg.experiment.adversary = Some("puf-substituter".into());
    assert!(run_experiment(&cfg).unwrap().passed());
    cfg.experiment.threshold = Some(1.1);
    assert!(!run_experiment(&cfg).unwrap().passed());
}
