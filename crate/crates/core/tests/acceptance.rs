//! Acceptance criteria 1-12, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use puflab::harness::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport};

const SEED: u64 = 1;

// Pinned tolerances.
const COMPLETENESS_TRIALS: u64 = 1000;
const ATTACK_TRIALS: u64 = 500;
const ZOO_TRIALS: u64 = 1000;
const BINDING_TRIALS: u64 = 10_000;
const HIDING_GAMES: u64 = 10_000;
const HIDING_MAX_ADVANTAGE: f64 = 0.02;
const LEMMA_TRIALS: u64 = 10_000;
const FE_TRIALS: u64 = 10_000;
const ECC_MAX_LEN: usize = 18;
const TQ_TRIALS: u64 = 1000;
const TQ_MIN_DETECTION: f64 = 0.99;
const UC_RUNS: u64 = 10_000;
const UC_MAX_SD: f64 = 0.02;
const UC_E_GUESS_N: usize = 8;

struct Outcome {
    passed: bool,
    detail: String,
}

fn cfg(kind: ExperimentKind, protocol: Option<&str>, adversary: Option<&str>, n: usize, trials: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, n, trials, SEED);
    c.experiment.protocol = protocol.map(String::from);
    c.experiment.adversary = adversary.map(String::from);
    c
}

fn run(c: &ExperimentConfig) -> Result<ExperimentReport, String> {
    run_experiment(c).map_err(|e| e.to_string())
}

fn metric(r: &ExperimentReport, name: &str) -> Result<f64, String> {
    r.metrics.get(name).copied().ok_or_else(|| format!("report lacks metric {name}"))
}

fn check_passed(r: &ExperimentReport, name: &str) -> Result<bool, String> {
    r.checks.iter().find(|c| c.name == name).map(|c| c.passed).ok_or_else(|| format!("report lacks check {name}"))
}

fn completeness() -> Result<Outcome, String> {
    let mut parts = Vec::new();
    let mut passed = true;
    for p in ["cpuf", "extpuf", "collextpuf", "blob-equalities", "uccompiler"] {
        let mut c = cfg(ExperimentKind::Completeness, Some(p), None, 16, COMPLETENESS_TRIALS);
        if p == "collextpuf" {
            c.params.n_coll = 4;
        }
        let r = run(&c)?;
        passed &= r.successes == COMPLETENESS_TRIALS;
        parts.push(format!("{p} {}/{}", r.successes, r.trials));
    }
    Ok(Outcome { passed, detail: format!("{}; need {COMPLETENESS_TRIALS}/{COMPLETENESS_TRIALS} each", parts.join(", ")) })
}

fn attack() -> Result<Outcome, String> {
    let r = run(&cfg(ExperimentKind::Attack, Some("original-extpuf"), Some("original-attacker"), 16, ATTACK_TRIALS))?;
    Ok(Outcome {
        passed: r.successes == ATTACK_TRIALS,
        detail: format!("bottom extracted and 0^k accepted in {}/{}; need {ATTACK_TRIALS}/{ATTACK_TRIALS}", r.successes, r.trials),
    })
}

fn zoo(protocol: &str) -> Result<ExperimentReport, String> {
    let mut c = cfg(ExperimentKind::Zoo, Some(protocol), Some("all"), 32, ZOO_TRIALS);
    c.params.k = 2;
    if protocol == "collextpuf" {
        c.params.n_coll = 4;
    }
    run(&c)
}

fn neutralization(zoos: &[(&str, ExperimentReport)], attack: &ExperimentReport) -> Result<Outcome, String> {
    let mut passed = check_passed(attack, "unconstructible-on-extpuf")? && check_passed(attack, "unconstructible-on-collextpuf")?;
    let mut parts = Vec::new();
    for (p, r) in zoos {
        let refused = check_passed(r, "original-attacker-unconstructible")?;
        let late = check_passed(r, "no-late-answers")?;
        let order = check_passed(r, "order-discipline")?;
        passed &= refused && late && order;
        parts.push(format!("{p}: refused {refused}, late answers none {late}, order kept {order}"));
    }
    Ok(Outcome { passed, detail: parts.join("; ") })
}

fn extraction(zoos: &[(&str, ExperimentReport)]) -> Result<Outcome, String> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (p, r) in zoos {
        let honest = check_passed(r, "honest-extraction")?;
        passed &= r.successes == 0 && honest;
        parts.push(format!("{p}: {} violations over {} zoo trials, honest extraction {honest}", r.successes, r.trials));
    }
    Ok(Outcome { passed, detail: format!("{}; need 0 violations", parts.join("; ")) })
}

fn binding() -> Result<Outcome, String> {
    let mut passed = true;
    let mut parts = Vec::new();
    for p in ["cpuf", "extpuf", "collextpuf"] {
        let mut c = cfg(ExperimentKind::Binding, Some(p), None, 32, BINDING_TRIALS);
        c.params.k = 4;
        if p == "collextpuf" {
            c.params.n_coll = 4;
        }
        let r = run(&c)?;
        passed &= r.successes == 0;
        parts.push(format!("{p} {}/{}", r.successes, r.trials));
    }
    Ok(Outcome { passed, detail: format!("successful openings {}; need 0", parts.join(", ")) })
}

fn hiding() -> Result<Outcome, String> {
    let mut passed = true;
    let mut parts = Vec::new();
    for p in ["cpuf", "extpuf", "collextpuf"] {
        let mut c = cfg(ExperimentKind::Hiding, Some(p), None, 32, HIDING_GAMES);
        c.params.k = 4;
        if p == "collextpuf" {
            c.params.n_coll = 4;
        }
        let adv = metric(&run(&c)?, "max_advantage")?;
        passed &= adv <= HIDING_MAX_ADVANTAGE;
        parts.push(format!("{p} {adv:.4}"));
    }
    Ok(Outcome { passed, detail: format!("max advantage {}; need <= {HIDING_MAX_ADVANTAGE}", parts.join(", ")) })
}

fn costs() -> Result<Outcome, String> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (p, n, want) in [("uccompiler", 16, 4.0), ("uccompiler-compat", 16, 8.0 * 16.0 + 2.0), ("uccompiler-compat", 8, 66.0)] {
        let r = run(&cfg(ExperimentKind::Costs, Some(p), None, n, 5))?;
        let (pufs, phases) = (metric(&r, "pufs_created")?, metric(&r, "exchange_phases")?);
        passed &= pufs == want && phases == want && r.successes == r.trials;
        parts.push(format!("{p} n={n} ({pufs}, {phases}) want ({want}, {want})"));
    }
    Ok(Outcome { passed, detail: parts.join("; ") })
}

fn lemmas() -> Result<Outcome, String> {
    let r = run(&cfg(ExperimentKind::Lemmas, None, None, 8, LEMMA_TRIALS))?;
    let ids = ["function", "independent", "minentropy", "chain-rule", "equality", "neighborhood"];
    let mut violations = 0.0;
    for id in ids {
        violations += metric(&r, &format!("violations.{id}"))?;
        if metric(&r, &format!("checks.{id}"))? < LEMMA_TRIALS as f64 {
            return Ok(Outcome { passed: false, detail: format!("lemma {id} checked fewer than {LEMMA_TRIALS} times") });
        }
    }
    Ok(Outcome {
        passed: violations == 0.0 && r.successes == LEMMA_TRIALS,
        detail: format!("{violations} violations over {} lemmas and {LEMMA_TRIALS} distributions at tolerance 1e-9", ids.len()),
    })
}

fn fe_ecc() -> Result<Outcome, String> {
    let ecc = run(&cfg(ExperimentKind::Ecc, None, None, ECC_MAX_LEN, 1))?;
    let fe = run(&cfg(ExperimentKind::Fe, None, None, 32, FE_TRIALS))?;
    Ok(Outcome {
        passed: ecc.failures == 0 && ecc.successes > 0 && fe.successes == FE_TRIALS,
        detail: format!(
            "ecc {} of {} patterns decoded (L <= {ECC_MAX_LEN}); fe {}/{FE_TRIALS} reproduced",
            ecc.successes, ecc.trials, fe.successes
        ),
    })
}

fn test_query() -> Result<Outcome, String> {
    let r = run(&cfg(ExperimentKind::Tq, None, Some("puf-substituter"), 32, TQ_TRIALS))?;
    let (rate, fp) = (metric(&r, "detection_rate")?, metric(&r, "false_positives")?);
    Ok(Outcome {
        passed: rate >= TQ_MIN_DETECTION && fp == 0.0,
        detail: format!("detected {rate:.3} (need >= {TQ_MIN_DETECTION}), false positives {fp} of {TQ_TRIALS} (need 0)"),
    })
}

fn uc() -> Result<Outcome, String> {
    let receiver = run(&cfg(ExperimentKind::UcReceiver, None, None, 16, UC_RUNS))?;
    let sender = run(&cfg(ExperimentKind::UcSender, None, Some("honest-sender"), 16, UC_RUNS))?;
    let guess = run(&cfg(ExperimentKind::UcSender, None, Some("e-guessing-sender"), UC_E_GUESS_N, UC_RUNS))?;
    let sd_r = metric(&receiver, "max_sd")?;
    let sd_s = metric(&sender, "max_sd")?;
    let sd_g = metric(&guess, "max_sd")?;
    let (freq, bound) = (metric(&guess, "sim_abort_frequency")?, metric(&guess, "e_guess_bound")?);
    Ok(Outcome {
        passed: sd_r <= UC_MAX_SD && sd_s <= UC_MAX_SD && sd_g <= UC_MAX_SD && freq <= bound,
        detail: format!(
            "max SD receiver {sd_r:.4}, sender {sd_s:.4}, e-guessing {sd_g:.4} (need <= {UC_MAX_SD}); \
             abort frequency {freq:.5} at n={UC_E_GUESS_N} (need <= 2^-n + 3 sigma = {bound:.5})"
        ),
    })
}

fn determinism() -> Result<Outcome, String> {
    let dir = std::env::temp_dir().join(format!("puflab-acceptance-{}", std::process::id()));
    let once = |tag: &str, kind, protocol: Option<&str>, adversary: Option<&str>| -> Result<(String, Vec<u8>), String> {
        let mut c = cfg(kind, protocol, adversary, 16, 200);
        let events = dir.join(format!("{tag}.events.jsonl"));
        if kind == ExperimentKind::Completeness {
            c.output.events = Some(events.clone());
        }
        let r = run(&c)?;
        Ok((r.to_json(), std::fs::read(&events).unwrap_or_default()))
    };
    let mut same = true;
    let mut parts = Vec::new();
    let cases = [
        (ExperimentKind::Completeness, Some("uccompiler"), None),
        (ExperimentKind::Zoo, Some("extpuf"), Some("all")),
        (ExperimentKind::UcSender, None, Some("alternating-sender")),
        (ExperimentKind::Hiding, Some("extpuf"), None),
    ];
    for (i, (kind, p, a)) in cases.into_iter().enumerate() {
        let a1 = once(&format!("{i}a"), kind, p, a)?;
        let a2 = once(&format!("{i}b"), kind, p, a)?;
        same &= a1 == a2;
        parts.push(format!("{kind} {}", if a1 == a2 { "identical" } else { "DIFFERS" }));
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(Outcome { passed: same, detail: format!("reports and event logs across two runs: {}", parts.join(", ")) })
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut all = true;
    let mut line = |n: u32, name: &str, result: Result<Outcome, String>, t: Instant| {
        let secs = t.elapsed().as_secs_f64();
        let (passed, detail) = match result {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!("criterion {n:>2} {} {name}: {detail} [{secs:.1}s]", if passed { "PASS" } else { "FAIL" });
    };

    let t = Instant::now();
    line(1, "completeness", completeness(), t);
    let t = Instant::now();
    line(2, "attack reproduction", attack(), t);

    let t = Instant::now();
    let zoos: Result<Vec<(&str, ExperimentReport)>, String> =
        ["extpuf", "collextpuf"].into_iter().map(|p| zoo(p).map(|r| (p, r))).collect();
    let attack_report = run(&cfg(ExperimentKind::Attack, Some("original-extpuf"), Some("original-attacker"), 16, 1));
    let (c3, c4) = match (&zoos, &attack_report) {
        (Ok(z), Ok(a)) => (neutralization(z, a), extraction(z)),
        (Err(e), _) | (_, Err(e)) => (Err(e.clone()), Err(e.clone())),
    };
    line(3, "attack neutralization", c3, t);
    line(4, "extraction", c4, t);

    let t = Instant::now();
    line(5, "binding", binding(), t);
    let t = Instant::now();
    line(6, "hiding", hiding(), t);
    let t = Instant::now();
    line(7, "cost accounting", costs(), t);
    let t = Instant::now();
    line(8, "entropy lemmas", lemmas(), t);
    let t = Instant::now();
    line(9, "fe/ecc oracles", fe_ecc(), t);
    let t = Instant::now();
    line(10, "test query", test_query(), t);
    let t = Instant::now();
    line(11, "uc simulators", uc(), t);
    let t = Instant::now();
    line(12, "determinism", determinism(), t);

    println!("acceptance {} in {:.1}s", if all { "PASS" } else { "FAIL" }, started.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
