use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::config::{ConfigError, ExperimentConfig, ExperimentKind, Resolved};
use super::props::{self, CrpGuesser};
use super::report::{write_file, ExperimentReport, Outcome};
use crate::adversaries::uc_sim::{
    feature_distances, ideal_receiver_case, ideal_sender_case, real_receiver_case, real_sender_case, UcFeatures,
};
use crate::adversaries::{
    attack_original_extpuf, cpuf_binding_trial, hiding_game, original_trial, zoo_entry, zoo_trial, AdversaryError,
    CommitterKind, Distinguisher, ReceiverKind, Role, UcSenderKind, ZooTrial,
};
use crate::bitlab::{check_entropy_lemmas, neighborhood_fraction, BitString, Lemma};
use crate::functionality::{RECEIVER, SENDER};
use crate::protocols::{
    blob_equalities, coll_commit, coll_open, cost_report, cpuf_commit, cpuf_verify, original_commit, original_decommit,
    run_compat_commitment, standard_world, uc_commit, uc_decommit, BlobState, Bundle, CpufCommitter, CpufParams,
    DeskConfig, ExtParams, HonestCollCommitter, HonestCollReceiver, HonestCpufCommitter, HonestOriginalCommitter,
    HonestUcReceiver, HonestUcSender, OriginalParams, ProtocolError, ProtocolId, Resources, UcParams, UniformMasks,
    Verdict,
};
use crate::pufmodel::{default_samples, estimate_unpredictability, PufParams, UnpredictabilityOutcome};
use crate::seeds::derive_seed;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("experiment could not run: {0}")]
    Run(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl From<ProtocolError> for HarnessError {
    fn from(e: ProtocolError) -> Self {
        HarnessError::Run(e.to_string())
    }
}

impl From<AdversaryError> for HarnessError {
    fn from(e: AdversaryError) -> Self {
        HarnessError::Run(e.to_string())
    }
}

/// Default bound on each kind's headline statistic; see [`run_experiment`].
pub fn default_threshold(kind: ExperimentKind) -> f64 {
    use ExperimentKind::*;
    match kind {
        Completeness | Attack | Lemmas | Ecc | Fe | Consistency | Unpredictability => 1.0,
        Zoo | Binding | Crp | Costs => 0.0,
        Hiding | Indist | Uniformity | UcReceiver | UcSender => 0.02,
        Tq => 0.99,
        Cq => 10.0,
    }
}

/// Runs `f` on trial seeds `derive_seed(seed, label, i)` for `i < trials`,
/// in parallel, and returns the results in trial order.
fn par_trials<T: Send>(trials: u64, seed: u64, label: &str, f: impl Fn(u64, u64) -> T + Sync + Send) -> Vec<T> {
    (0..trials).into_par_iter().map(|i| f(i, derive_seed(seed, label, i))).collect()
}

/// Protocol errors other than bad parameters become aborts at their step.
fn outcome_of<T>(r: &Result<T, ProtocolError>, ok: impl FnOnce(&T) -> bool) -> Result<Outcome, HarnessError> {
    match r {
        Ok(v) => Ok(Outcome::from_bool(ok(v))),
        Err(ProtocolError::Params(m)) => Err(HarnessError::Run(m.clone())),
        Err(e) => Ok(Outcome::Abort(e.step())),
    }
}

/// Validates the config, runs it and writes the requested outputs.
///
/// Each kind counts one event per trial as a success and checks a headline
/// statistic against the threshold (the config's, or [`default_threshold`]):
///
/// | kind | success | headline check |
/// |---|---|---|
/// | completeness | decommitment accepted with the committed value | rate >= threshold |
/// | costs | measured (PUFs, exchange phases) equal the expected pair | all trials match |
/// | attack | extractor outputs bottom and the opening of `0^k` is accepted | rate >= threshold (attacker), = 0 (honest) |
/// | zoo | an opening is accepted for a value other than the extracted one | rate <= threshold |
/// | binding | an opening to a value other than the committed one is accepted | rate <= threshold |
/// | hiding | the replay distinguisher guesses the bit | max advantage <= threshold |
/// | lemmas | no inequality violated on the trial's distributions | rate >= threshold |
/// | ecc | one (code, message, error pattern) decodes correctly | rate >= threshold |
/// | fe | Rep reproduces Gen's key under noise of weight <= t | rate >= threshold |
/// | consistency | responses are within `d_noise` and Rep reproduces the key | rate >= threshold |
/// | uniformity | the leading bit of the key is one | distance to uniform <= threshold |
/// | unpredictability | the estimate clears the family's claimed `m` | rate >= threshold |
/// | cq | a blind query lands within `d_min` | per-query rate <= threshold x ball fraction |
/// | indist | the distinguisher guesses the bit | advantage <= threshold |
/// | crp | a guessed `(s, st, p)` reproduces | rate <= threshold |
/// | tq | a substituted PUF is flagged | rate >= threshold, no honest return flagged |
/// | uc-receiver, uc-sender | the real-world run accepts | max feature distance <= threshold |
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let resolved = cfg.validate()?;
    let started = Instant::now();
    let mut events = None;
    let mut report = run_resolved(cfg, &resolved, &mut events)?;
    report.wall_time = started.elapsed();
    persist(cfg, &report, events.as_deref())?;
    Ok(report)
}

fn persist(cfg: &ExperimentConfig, report: &ExperimentReport, events: Option<&str>) -> Result<(), HarnessError> {
    let io = |path: &std::path::Path, r: std::io::Result<()>| {
        r.map_err(|source| HarnessError::Io { path: path.display().to_string(), source })
    };
    if let Some(p) = &cfg.output.report {
        io(p, report.write_json(p))?;
    }
    if let Some(p) = &cfg.output.table {
        io(p, report.write_table(p))?;
    }
    if let (Some(p), Some(ev)) = (&cfg.output.events, events) {
        io(p, write_file(p, ev))?;
    }
    Ok(())
}

fn run_resolved(
    cfg: &ExperimentConfig,
    r: &Resolved,
    events: &mut Option<String>,
) -> Result<ExperimentReport, HarnessError> {
    let e = &cfg.experiment;
    let mut report = ExperimentReport::new(r.kind, e.seed, r.desk.clone());
    report.protocol = r.protocol.map(|p| p.id().to_string());
    report.adversary = r.adversary.clone();
    let threshold = e.threshold.unwrap_or_else(|| default_threshold(r.kind));
    let ctx = Ctx { r, trials: e.trials, seed: e.seed, threshold };
    use ExperimentKind::*;
    match r.kind {
        Completeness | Costs => honest_runs(&ctx, &mut report, events)?,
        Attack => attack(&ctx, &mut report)?,
        Zoo => zoo_runs(&ctx, &mut report)?,
        Binding => binding(&ctx, &mut report)?,
        Hiding => hiding(&ctx, &mut report)?,
        Lemmas => lemmas(&ctx, &mut report)?,
        Ecc => ecc(&ctx, &mut report),
        Fe => fe(&ctx, &mut report)?,
        Consistency => consistency(&ctx, &mut report)?,
        Uniformity => uniformity(&ctx, &mut report)?,
        Unpredictability => unpredictability(&ctx, &mut report)?,
        Cq => cq(&ctx, &mut report)?,
        Indist => indist(&ctx, &mut report)?,
        Crp => crp(&ctx, &mut report)?,
        Tq => tq(&ctx, &mut report)?,
        UcReceiver => uc_receiver(&ctx, &mut report)?,
        UcSender => uc_sender(&ctx, &mut report)?,
    }
    report.finish();
    Ok(report)
}

struct Ctx<'a> {
    r: &'a Resolved,
    trials: u64,
    seed: u64,
    threshold: f64,
}

impl Ctx<'_> {
    fn desk(&self) -> &DeskConfig {
        &self.r.desk
    }

    fn protocol(&self) -> Result<ProtocolId, HarnessError> {
        self.r.protocol.ok_or_else(|| HarnessError::Run(format!("{} needs a protocol", self.r.kind)))
    }

    fn label(&self) -> &'static str {
        self.r.kind.id()
    }

    /// Bundle of the committer's PUF family at this size, with the key length
    /// taken from `ext_out_len` when set.
    fn bundle(&self) -> Result<Bundle, HarnessError> {
        let d = self.desk();
        let out = d.ext_out_len.unwrap_or(d.n);
        Ok(Bundle::sized(d.n, out, d.d_noise, d.d_min_e(), d.margin)?)
    }
}

fn frac(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One honest run of `protocol` with a uniformly chosen value.
pub struct HonestRun {
    pub outcome: Outcome,
    pub resources: Resources,
    pub cost: (u64, u64),
    /// Event log and transcript as JSON lines, when requested.
    pub logs: Option<(String, String)>,
}

/// Honest committer and receiver; `count` strings for the collective commitment.
pub fn honest_run(
    protocol: ProtocolId,
    cfg: &DeskConfig,
    count: usize,
    seed: u64,
    keep_logs: bool,
) -> Result<HonestRun, ProtocolError> {
    let mut w = standard_world(derive_seed(seed, "world", 0));
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "values", 0));
    let cseed = derive_seed(seed, "committer", 0);
    let rseed = derive_seed(seed, "receiver", 0);
    let verdict: Result<bool, ProtocolError> = match protocol {
        ProtocolId::Cpuf => {
            let params = CpufParams::desk(cfg)?;
            let x = BitString::random(params.k, &mut rng);
            let mut s = HonestCpufCommitter::new(SENDER, x.clone(), cseed);
            let mut masks = UniformMasks(ChaCha20Rng::seed_from_u64(rseed));
            cpuf_commit(&mut w, &params, &mut s, RECEIVER, &mut masks).map(|session| {
                s.open(&mut w, &params).is_some_and(|o| cpuf_verify(&mut w, &params, &session, &o) == Verdict::Accept(x))
            })
        }
        ProtocolId::OriginalExtpuf => {
            let params = OriginalParams::desk(cfg)?;
            let x = BitString::random(params.k, &mut rng);
            let mut s = HonestOriginalCommitter::new(SENDER, x.clone(), cseed);
            let mut masks = UniformMasks(ChaCha20Rng::seed_from_u64(derive_seed(seed, "masks", 0)));
            original_commit(&mut w, &params, &mut s, RECEIVER, rseed, &mut masks)
                .and_then(|session| original_decommit(&mut w, &params, &session, &mut s))
                .map(|v| v == Verdict::Accept(x))
        }
        ProtocolId::Extpuf | ProtocolId::Collextpuf => {
            let params = ExtParams::desk(cfg)?;
            let count = if protocol == ProtocolId::Extpuf { 1 } else { count.max(1) };
            let xs: Vec<BitString> = (0..count).map(|_| BitString::random(params.k, &mut rng)).collect();
            let mut s = HonestCollCommitter::new(SENDER, xs.clone(), cseed);
            let mut r = HonestCollReceiver::new(RECEIVER, rseed);
            coll_commit(&mut w, &params, &mut s, &mut r).map(|session| {
                xs.iter()
                    .enumerate()
                    .all(|(i, x)| coll_open(&mut w, &params, &session, &mut s, i) == Verdict::Accept(x.clone()))
            })
        }
        ProtocolId::BlobEqualities => {
            let b: bool = rng.random();
            let blobs = BlobState::honest(b, cfg.n, &mut rng);
            let e: Vec<bool> = (0..cfg.n).map(|_| rng.random()).collect();
            Ok(blob_equalities(&blobs, &blobs.honest_y(), &e))
        }
        ProtocolId::Uccompiler => {
            let params = UcParams::desk(cfg)?;
            let b: bool = rng.random();
            let mut s = HonestUcSender::new(b, cseed);
            let mut r = HonestUcReceiver::new(params.n, rseed);
            uc_commit(&mut w, &params, &mut s, &mut r)
                .map(|state| uc_decommit(&mut w, &params, &state, &mut s) == Verdict::Accept(BitString::from_bits(&[b])))
        }
        ProtocolId::UccompilerCompat => {
            let b: bool = rng.random();
            run_compat_commitment(&mut w, cfg, b, cseed).map(|v| v == Verdict::Accept(BitString::from_bits(&[b])))
        }
    };
    if let Err(ProtocolError::Params(m)) = &verdict {
        return Err(ProtocolError::Params(m.clone()));
    }
    let cost = cost_report(&w);
    Ok(HonestRun {
        outcome: match verdict {
            Ok(ok) => Outcome::from_bool(ok),
            Err(e) => Outcome::Abort(e.step()),
        },
        resources: Resources::of(&w),
        cost: (cost.pufs_created as u64, cost.exchange_phases as u64),
        logs: keep_logs.then(|| (w.func().log_jsonl(), w.transcript_jsonl())),
    })
}

/// (PUFs created, exchange phases) of one honest run.
pub fn expected_cost(protocol: ProtocolId, n: usize) -> (u64, u64) {
    let n = n as u64;
    match protocol {
        ProtocolId::Cpuf => (1, 1),
        ProtocolId::OriginalExtpuf => (3, 3),
        ProtocolId::Extpuf | ProtocolId::Collextpuf => (2, 2),
        ProtocolId::BlobEqualities => (0, 0),
        ProtocolId::Uccompiler => (4, 4),
        ProtocolId::UccompilerCompat => (8 * n + 2, 8 * n + 2),
    }
}

fn honest_runs(ctx: &Ctx, report: &mut ExperimentReport, events: &mut Option<String>) -> Result<(), HarnessError> {
    let protocol = ctx.protocol()?;
    let (desk, count) = (ctx.desk().clone(), ctx.r.n_coll);
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |i, s| honest_run(protocol, &desk, count, s, i == 0));
    let expect = expected_cost(protocol, desk.n);
    let mut cost_mismatch = 0;
    for (i, run) in runs.into_iter().enumerate() {
        let run = run?;
        if i == 0 {
            *events = run.logs.map(|l| l.0);
            report.metric("pufs_created", run.cost.0 as f64);
            report.metric("exchange_phases", run.cost.1 as f64);
        }
        if run.cost != expect {
            cost_mismatch += 1;
        }
        report.resources.add(&run.resources);
        if ctx.r.kind == ExperimentKind::Costs {
            report.record(&Outcome::from_bool(run.cost == expect));
        } else {
            report.record(&run.outcome);
        }
    }
    report.metric("expected_pufs", expect.0 as f64);
    report.metric("expected_exchange_phases", expect.1 as f64);
    if ctx.r.kind == ExperimentKind::Costs {
        report.check(
            "cost-matches",
            cost_mismatch == 0,
            format!("expected {expect:?}; {cost_mismatch} of {} runs differ", ctx.trials),
        );
    } else {
        let rate = frac(report.successes, report.trials);
        report.check(
            "completeness",
            rate >= ctx.threshold,
            format!("{} of {} accepted (need rate >= {})", report.successes, report.trials, ctx.threshold),
        );
    }
    Ok(())
}

fn attack(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let attacking = ctx.r.adversary.as_deref() != Some("honest-committer");
    let desk = ctx.desk().clone();
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, s| original_trial(&desk, attacking, s));
    let zero = BitString::zeros(desk.k);
    let (mut extra, mut extracted_ok) = (0u64, 0u64);
    for run in &runs {
        report.record(&outcome_of(run, |t| t.extracted.is_none() && t.accepted.as_ref() == Some(&zero))?);
        if let Ok(t) = run {
            report.resources.add(&t.resources);
            extra += t.extra_answered as u64;
            extracted_ok += (t.extracted.as_ref() == Some(&t.committed)) as u64;
        }
    }
    report.metric("extra_query_answered", extra as f64);
    report.metric("extracted_committed_value", extracted_ok as f64);
    let rate = frac(report.successes, report.trials);
    if attacking {
        report.check(
            "attack-reproduced",
            rate >= ctx.threshold,
            format!("bottom with accepted 0 in {} of {}", report.successes, report.trials),
        );
    } else {
        report.check(
            "honest-extracts",
            report.successes == 0 && extracted_ok == report.trials,
            format!("{extracted_ok} of {} extracted the committed value", report.trials),
        );
    }
    structural_unconstructible(report, ctx.seed);
    Ok(())
}

/// The original attacker cannot be built against the modified protocols.
fn structural_unconstructible(report: &mut ExperimentReport, seed: u64) {
    for target in [ProtocolId::Extpuf, ProtocolId::Collextpuf] {
        let r = attack_original_extpuf(target, SENDER, 1, seed);
        let ok = matches!(r, Err(AdversaryError::Unconstructible(_)));
        let detail = match r {
            Err(e) => e.to_string(),
            Ok(_) => "constructed".into(),
        };
        report.check(format!("unconstructible-on-{target}"), ok, detail);
    }
}

enum Member {
    Committer(CommitterKind),
    Receiver(ReceiverKind),
    OriginalAttacker,
}

impl Member {
    fn id(&self) -> &'static str {
        match self {
            Member::Committer(k) => k.id(),
            Member::Receiver(k) => k.id(),
            Member::OriginalAttacker => "original-attacker",
        }
    }
}

fn zoo_members(adversary: Option<&str>) -> Result<Vec<Member>, HarnessError> {
    match adversary {
        None | Some("all") => {
            let mut m: Vec<Member> = CommitterKind::ALL.into_iter().map(Member::Committer).collect();
            m.extend(ReceiverKind::ALL.into_iter().filter(|k| *k != ReceiverKind::Honest).map(Member::Receiver));
            m.push(Member::OriginalAttacker);
            Ok(m)
        }
        Some("original-attacker") => Ok(vec![Member::OriginalAttacker]),
        Some(id) => {
            let entry = zoo_entry(id)?;
            match entry.role {
                Role::Committer => CommitterKind::from_id(id).map(|k| vec![Member::Committer(k)]),
                Role::Receiver => ReceiverKind::from_id(id).map(|k| vec![Member::Receiver(k)]),
                Role::UcSender => None,
            }
            .ok_or_else(|| HarnessError::Run(format!("`{id}` is not a zoo trial member")))
        }
    }
}

fn zoo_runs(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let protocol = ctx.protocol()?;
    let members = zoo_members(ctx.r.adversary.as_deref())?;
    let (desk, count, budget) = (ctx.desk().clone(), ctx.r.n_coll, ctx.r.budget);
    let (mut budgets_ok, mut late, mut order_bad, mut honest_bad, mut honest_runs) = (true, 0usize, 0u64, 0u64, 0u64);
    for member in &members {
        if let Member::OriginalAttacker = member {
            let refused = par_trials(ctx.trials, ctx.seed, member.id(), |_, s| {
                matches!(attack_original_extpuf(protocol, SENDER, desk.k, s), Err(AdversaryError::Unconstructible(_)))
            });
            let n_refused = refused.iter().filter(|&&r| r).count() as u64;
            for ok in refused {
                report.record(&if ok { Outcome::Abort("unconstructible".into()) } else { Outcome::Success });
            }
            report.metric("violations.original-attacker", (ctx.trials - n_refused) as f64);
            report.check(
                "original-attacker-unconstructible",
                n_refused == ctx.trials,
                format!("construction refused in {n_refused} of {}", ctx.trials),
            );
            continue;
        }
        let (c, r) = match member {
            Member::Committer(k) => (*k, ReceiverKind::Honest),
            Member::Receiver(k) => (CommitterKind::Honest, *k),
            Member::OriginalAttacker => unreachable!(),
        };
        let runs: Vec<Result<ZooTrial, AdversaryError>> =
            par_trials(ctx.trials, ctx.seed, member.id(), |_, s| zoo_trial(protocol, c, r, &desk, count, budget, s));
        let (mut violations, mut rejected, mut aborted) = (0u64, 0u64, 0u64);
        for t in runs {
            let t = t?;
            report.resources.add(&t.resources);
            budgets_ok &= t.budgets_respected;
            late += t.late_answers;
            if matches!(t.order, Some(Err(_))) {
                order_bad += 1;
            }
            rejected += t.construction_rejected as u64;
            let outcome = match &t.commit_abort {
                Some(step) => {
                    aborted += 1;
                    Outcome::Abort(step.clone())
                }
                None => Outcome::from_bool(t.violations > 0),
            };
            violations += (t.violations > 0) as u64;
            if c == CommitterKind::Honest && r == ReceiverKind::Honest {
                honest_runs += 1;
                let opened = t.accepted.iter().zip(&t.committed).all(|(a, x)| a.as_ref() == Some(x));
                if t.commit_abort.is_some() || !t.extraction_correct || !opened {
                    honest_bad += 1;
                }
            }
            report.record(&outcome);
        }
        report.metric(format!("violations.{}", member.id()), violations as f64);
        report.metric(format!("aborts.{}", member.id()), aborted as f64);
        if r == ReceiverKind::StatefulPufE && budget.k_state == Some(0) {
            report.check(
                "stateful-puf-e-rejected",
                rejected == ctx.trials,
                format!("construction rejected in {rejected} of {}", ctx.trials),
            );
        }
    }
    report.metric("members", members.len() as f64);
    report.metric("trials_per_member", ctx.trials as f64);
    let rate = frac(report.successes, report.trials);
    report.check(
        "no-extraction-violation",
        rate <= ctx.threshold,
        format!("{} accepted openings differ from the extracted value", report.successes),
    );
    if honest_runs > 0 {
        report.check(
            "honest-extraction",
            honest_bad == 0,
            format!("{} of {honest_runs} honest runs extracted and opened correctly", honest_runs - honest_bad),
        );
    }
    report.check("budgets-respected", budgets_ok, "audited from every event log");
    report.check("no-late-answers", late == 0, format!("{late} queries answered after PUF_E was returned"));
    report.check("order-discipline", order_bad == 0, format!("{order_bad} transcripts out of order"));
    Ok(())
}

fn binding(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let protocol = ctx.protocol()?;
    let (desk, count, budget) = (ctx.desk().clone(), ctx.r.n_coll, ctx.r.budget);
    let runs: Vec<Result<(bool, Resources), ProtocolError>> = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, s| {
        match protocol {
            ProtocolId::Cpuf => cpuf_binding_trial(&desk, s),
            _ => zoo_trial(protocol, CommitterKind::RandomDecommit, ReceiverKind::Honest, &desk, count, budget, s)
                .map_err(|e| ProtocolError::Params(e.to_string()))
                .and_then(|t| match t.commit_abort {
                    Some(step) => Err(ProtocolError::Abort(step)),
                    None => Ok((t.accepted.iter().any(Option::is_some), t.resources)),
                }),
        }
    });
    for run in &runs {
        report.record(&outcome_of(run, |(accepted, _)| *accepted)?);
        if let Ok((_, res)) = run {
            report.resources.add(res);
        }
    }
    let (n, k) = (desk.n as f64, desk.k as f64);
    report.metric("bound_log2", -n + 2.0 * k.log2());
    report.check(
        "binding",
        frac(report.successes, report.trials) <= ctx.threshold,
        format!("{} of {} openings to another value accepted", report.successes, report.trials),
    );
    Ok(())
}

fn hiding(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let protocol = ctx.protocol()?;
    let desk = ctx.desk().clone();
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, s| {
        let b = derive_seed(s, "bit", 0) & 1 == 1;
        hiding_game(protocol, &desk, b, s).map(|g| g.into_iter().map(|guess| guess == b).collect::<Vec<_>>())
    });
    let mut correct = [0u64; 3];
    let replay = Distinguisher::ALL.iter().position(|d| *d == Distinguisher::PufReplay).expect("listed");
    for run in &runs {
        report.record(&outcome_of(run, |c| c[replay])?);
        if let Ok(c) = run {
            for (slot, &ok) in correct.iter_mut().zip(c) {
                *slot += ok as u64;
            }
        }
    }
    let games = runs.iter().filter(|r| r.is_ok()).count() as u64;
    let mut worst = 0.0f64;
    for (d, c) in Distinguisher::ALL.iter().zip(correct) {
        let adv = (frac(c, games) - 0.5).abs();
        worst = worst.max(adv);
        report.metric(format!("advantage.{}", d.id()), adv);
    }
    report.metric("max_advantage", worst);
    report.check("hiding", worst <= ctx.threshold, format!("max advantage {worst:.4} over {games} games"));
    Ok(())
}

fn lemmas(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let max_support = ctx.desk().n;
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, s| check_entropy_lemmas(1, max_support, s));
    let mut tallies: BTreeMap<Lemma, (u64, u64, f64)> = BTreeMap::new();
    for run in runs {
        let rep = run.map_err(|e| HarnessError::Run(e.to_string()))?;
        report.record(&Outcome::from_bool(rep.total_violations() == 0));
        for (lemma, t) in rep.tallies {
            let e = tallies.entry(lemma).or_insert((0, 0, f64::INFINITY));
            e.0 += t.checks;
            e.1 += t.violations;
            e.2 = e.2.min(t.min_slack);
        }
    }
    let mut total = 0;
    for (lemma, (checks, violations, slack)) in &tallies {
        report.metric(format!("checks.{}", lemma.id()), *checks as f64);
        report.metric(format!("violations.{}", lemma.id()), *violations as f64);
        report.metric(format!("min_slack.{}", lemma.id()), *slack);
        total += violations;
    }
    report.check(
        "lemmas",
        frac(report.successes, report.trials) >= ctx.threshold,
        format!("{total} violations over {} lemmas", tallies.len()),
    );
    report.check("all-lemmas-exercised", tallies.len() == Lemma::ALL.len(), format!("{} of {}", tallies.len(), Lemma::ALL.len()));
    Ok(())
}

fn ecc(ctx: &Ctx, report: &mut ExperimentReport) {
    let codes = props::small_codes(ctx.desk().n);
    let sweeps: Vec<props::EccSweep> = codes.par_iter().map(|&(m, f)| props::ecc_sweep(m, f)).collect();
    let (cases, failures): (u64, u64) = sweeps.iter().fold((0, 0), |a, s| (a.0 + s.cases, a.1 + s.failures));
    report.trials = cases;
    report.successes = cases - failures;
    report.failures = failures;
    report.metric("codes", codes.len() as f64);
    report.metric("max_code_len", ctx.desk().n as f64);
    report.check(
        "ecc-exhaustive",
        frac(report.successes, report.trials) >= ctx.threshold,
        format!("{failures} of {cases} correctable patterns decoded wrongly"),
    );
}

fn fe(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let bundle = ctx.bundle()?;
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, s| props::fe_round_trip(&bundle.fe, s));
    for ok in runs {
        report.record(&Outcome::from_bool(ok));
    }
    report.metric("t", bundle.fe.params().t as f64);
    report.metric("source_len", bundle.fe.params().source_len as f64);
    report.check(
        "fe-round-trip",
        frac(report.successes, report.trials) >= ctx.threshold,
        format!("{} of {} reproduced", report.successes, report.trials),
    );
    Ok(())
}

fn consistency(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let bundle = ctx.bundle()?;
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, s| props::consistency_trial(&bundle, s));
    let mut unbounded = 0;
    for run in &runs {
        report.record(&outcome_of(run, |c| c.bounded && c.reproduced)?);
        unbounded += run.as_ref().is_ok_and(|c| !c.bounded) as u64;
    }
    report.metric("noise_bound_exceeded", unbounded as f64);
    report.check(
        "consistency",
        frac(report.successes, report.trials) >= ctx.threshold,
        format!("{} of {} reproduced", report.successes, report.trials),
    );
    Ok(())
}

/// Key length of the almost-uniformity experiment unless `ext_out_len` is set.
pub const UNIFORMITY_OUT_LEN: usize = 3;

fn uniformity(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let d = ctx.desk();
    let out = d.ext_out_len.unwrap_or(UNIFORMITY_OUT_LEN);
    if out > 12 {
        return Err(HarnessError::Run(format!("uniformity histograms need ext_out_len <= 12, got {out}")));
    }
    let bundle = Bundle::sized(d.n, out, d.d_noise, d.d_min_e(), d.margin)?;
    let (s, q) = props::uniformity_points(&bundle, ctx.seed);
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, t| props::uniformity_sample(&bundle, &s, &q, t));
    let bins = 1usize << (out + 2);
    let mut hist = vec![0u64; bins];
    for run in &runs {
        report.record(&outcome_of(run, |v| v & 1 == 1)?);
        if let Ok(v) = run {
            hist[*v as usize] += 1;
        }
    }
    let sd = props::uniformity_distance(&hist, out);
    report.metric("statistical_distance", sd);
    report.metric("noise_floor", props::uniform_noise_floor(bins, report.trials));
    report.metric("bins", bins as f64);
    report.check("almost-uniformity", sd <= ctx.threshold, format!("distance {sd:.4} over {bins} bins"));
    Ok(())
}

/// Response length of the family the unpredictability estimator samples.
pub const UNPREDICTABILITY_RG: usize = 8;
/// Claimed min-entropy of that family.
pub const UNPREDICTABILITY_M: usize = 6;
/// Non-adaptive queries per estimate.
pub const UNPREDICTABILITY_QUERIES: usize = 3;

fn unpredictability(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let d = ctx.desk();
    let noise = d.d_noise.min(UNPREDICTABILITY_RG);
    let params = PufParams::new(d.n, UNPREDICTABILITY_RG, noise, d.d_min_e(), UNPREDICTABILITY_M)
        .map_err(|e| HarnessError::Run(e.to_string()))?;
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, s| {
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(s, "points", 0));
        let challenge = BitString::random(params.n, &mut rng);
        let queries: Vec<BitString> = (0..UNPREDICTABILITY_QUERIES)
            .map(|_| {
                let dist = rng.random_range(params.d_min.min(params.n)..=params.n);
                props::at_distance(&challenge, dist, &mut rng)
            })
            .collect();
        let samples = default_samples(&params, queries.len());
        estimate_unpredictability(&params, &challenge, &queries, samples, s)
    });
    let mut lowest = f64::INFINITY;
    for run in runs {
        match run.map_err(|e| HarnessError::Run(e.to_string()))? {
            UnpredictabilityOutcome::Estimated { entropy_bits, clears_m, .. } => {
                lowest = lowest.min(entropy_bits);
                report.record(&Outcome::from_bool(clears_m));
            }
            UnpredictabilityOutcome::Vacuous => report.record(&Outcome::Success),
        }
    }
    report.metric("min_entropy_estimate", if lowest.is_finite() { lowest } else { params.rg as f64 });
    report.metric("claimed_m", params.m as f64);
    report.metric("rg", params.rg as f64);
    report.check(
        "unpredictability",
        frac(report.successes, report.trials) >= ctx.threshold,
        format!("{} of {} estimates clear m = {}", report.successes, report.trials, params.m),
    );
    Ok(())
}

/// Blind queries per CQ trial.
pub const CQ_QUERIES: usize = 16;

fn cq(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let d = ctx.desk();
    let d_min = d.d_min_e();
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, s| props::cq_trial(d.n, d_min, CQ_QUERIES, s));
    let hits: u64 = runs.iter().map(|&h| h as u64).sum();
    for h in runs {
        report.record(&Outcome::from_bool(h > 0));
    }
    let ball = neighborhood_fraction(d.n, d_min).map_err(|e| HarnessError::Run(e.to_string()))?;
    let per_query = frac(hits, ctx.trials * CQ_QUERIES as u64);
    let bound = ctx.threshold * ball;
    report.metric("per_query_frequency", per_query);
    report.metric("ball_fraction", ball);
    report.metric("bound", bound);
    report.check("cq", per_query <= bound, format!("{per_query:.3e} per query, bound {bound:.3e}"));
    Ok(())
}

fn indist(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let bundle = ctx.bundle()?;
    let runs = par_trials(ctx.trials, ctx.seed, ctx.label(), |_, s| props::indist_game(&bundle, s));
    for run in &runs {
        report.record(&outcome_of(run, |(b, g)| b == g)?);
    }
    let adv = (frac(report.successes, report.trials) - 0.5).abs();
    report.metric("advantage", adv);
    report.check("indistinguishability", adv <= ctx.threshold, format!("advantage {adv:.4}"));
    Ok(())
}

fn crp(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let bundle = ctx.bundle()?;
    for g in CrpGuesser::ALL {
        let runs = par_trials(ctx.trials, ctx.seed, g.id(), |_, s| props::crp_trial(&bundle, g, s));
        let before = report.successes;
        for run in &runs {
            report.record(&outcome_of(run, |&ok| ok)?);
        }
        report.metric(format!("successes.{}", g.id()), (report.successes - before) as f64);
    }
    report.metric("key_bits", bundle.out_len() as f64);
    report.check(
        "crp-guessing",
        frac(report.successes, report.trials) <= ctx.threshold,
        format!("{} of {} guesses reproduced", report.successes, report.trials),
    );
    Ok(())
}

fn tq(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let bundle = ctx.bundle()?;
    let substituted = par_trials(ctx.trials, ctx.seed, "tq-substitute", |_, s| props::tq_trial(&bundle, true, s));
    for run in &substituted {
        report.record(&outcome_of(run, |&flagged| flagged)?);
    }
    let honest = par_trials(ctx.trials, ctx.seed, "tq-honest", |_, s| props::tq_trial(&bundle, false, s));
    let mut false_pos = 0u64;
    for run in honest {
        false_pos += run? as u64;
    }
    let rate = frac(report.successes, report.trials);
    report.metric("detection_rate", rate);
    report.metric("false_positives", false_pos as f64);
    report.check("tq-detects-substitution", rate >= ctx.threshold, format!("{} of {} flagged", report.successes, report.trials));
    report.check("tq-no-false-positive", false_pos == 0, format!("{false_pos} of {} honest returns flagged", ctx.trials));
    Ok(())
}

/// The environment's input in trial `i`, shared by both worlds; the parties'
/// randomness is drawn independently per world.
fn env_bit(seed: u64, i: u64) -> bool {
    derive_seed(seed, "uc-env", i) & 1 == 1
}

fn record_features(report: &mut ExperimentReport, real: &[UcFeatures], ideal: &[UcFeatures]) -> f64 {
    let mut worst = 0.0f64;
    for (name, sd) in feature_distances(real, ideal) {
        report.metric(format!("sd.{name}"), sd);
        worst = worst.max(sd);
    }
    report.metric("max_sd", worst);
    for f in real.iter().chain(ideal) {
        report.resources.add(&f.resources);
    }
    for f in real {
        report.record(&if f.outcome.starts_with("accept") {
            Outcome::Success
        } else if let Some(step) = f.outcome.strip_prefix("commit-abort:") {
            Outcome::Abort(step.to_string())
        } else {
            Outcome::Failure
        });
    }
    worst
}

fn uc_receiver(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let desk = ctx.desk().clone();
    let b = |i| env_bit(ctx.seed, i);
    let real = par_trials(ctx.trials, ctx.seed, "uc-real", |i, s| real_receiver_case(&desk, b(i), s));
    let ideal = par_trials(ctx.trials, ctx.seed, "uc-ideal", |i, s| ideal_receiver_case(&desk, b(i), s));
    let real: Vec<UcFeatures> = real.into_iter().collect::<Result<_, _>>()?;
    let mut sim_aborts = 0u64;
    let mut ideal_f = Vec::with_capacity(ideal.len());
    for run in ideal {
        let (f, sim) = run?;
        sim_aborts += sim.aborted as u64;
        ideal_f.push(f);
    }
    let worst = record_features(report, &real, &ideal_f);
    report.metric("sim_aborts", sim_aborts as f64);
    report.check("uc-receiver-distance", worst <= ctx.threshold, format!("max feature distance {worst:.4}"));
    Ok(())
}

fn uc_sender(ctx: &Ctx, report: &mut ExperimentReport) -> Result<(), HarnessError> {
    let kind = match ctx.r.adversary.as_deref() {
        None | Some("honest-sender") => UcSenderKind::Honest,
        Some("e-guessing-sender") => UcSenderKind::EGuessing,
        Some("alternating-sender") => UcSenderKind::Alternating,
        Some(other) => return Err(HarnessError::Run(format!("`{other}` is not a UC sender"))),
    };
    let desk = ctx.desk().clone();
    let b = |i| env_bit(ctx.seed, i);
    let real = par_trials(ctx.trials, ctx.seed, "uc-real", |i, s| real_sender_case(kind, &desk, b(i), s));
    let ideal = par_trials(ctx.trials, ctx.seed, "uc-ideal", |i, s| ideal_sender_case(kind, &desk, b(i), s));
    let real: Vec<UcFeatures> = real.into_iter().collect::<Result<_, _>>()?;
    let (mut sim_aborts, mut sent_zero_on_empty) = (0u64, 0u64);
    let mut ideal_f = Vec::with_capacity(ideal.len());
    for run in ideal {
        let run = run?;
        sim_aborts += run.sim_abort as u64;
        if run.decommittable.as_ref().is_some_and(Vec::is_empty) && run.sent == Some(false) {
            sent_zero_on_empty += 1;
        }
        ideal_f.push(run.features);
    }
    let worst = record_features(report, &real, &ideal_f);
    let freq = frac(sim_aborts, ctx.trials);
    report.metric("sim_abort_frequency", freq);
    report.metric("sent_zero_on_empty_set", sent_zero_on_empty as f64);
    report.check("uc-sender-distance", worst <= ctx.threshold, format!("max feature distance {worst:.4}"));
    if kind == UcSenderKind::EGuessing {
        let p = 0.5f64.powi(desk.n as i32);
        let bound = p + 3.0 * (p * (1.0 - p) / ctx.trials as f64).sqrt();
        report.metric("e_guess_bound", bound);
        if desk.n <= 12 {
            report.check("e-guess-abort-bound", freq <= bound, format!("abort frequency {freq:.5}, bound {bound:.5}"));
        }
    }
    Ok(())
}
