use puflab::adversaries::uc_sim::*;
use puflab::adversaries::*;
use puflab::functionality::SENDER;
use puflab::protocols::{DeskConfig, ProtocolId, EXTRACTABLE_BUDGET};

#[test]
fn zoo_has_the_standard_members() {
    let z = zoo();
    assert!(z.len() >= 8);
    for id in ["original-attacker", "random-decommit", "e-guessing-sender", "puf-substituter", "stateful-puf-e", "outgoing-prober"] {
        assert!(zoo_entry(id).is_ok(), "{id} missing");
    }
    let mut ids: Vec<_> = z.iter().map(|e| e.id).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), z.len());
    assert!(matches!(zoo_entry("nope"), Err(AdversaryError::Unknown(_))));
}

#[test]
fn every_committer_runs_clean_for_ten_seeds() {
    let cfg = DeskConfig::new(16, 2);
    for protocol in [ProtocolId::Extpuf, ProtocolId::Collextpuf] {
        for kind in CommitterKind::ALL {
            for seed in 0..10 {
                let t = zoo_trial(protocol, kind, ReceiverKind::Honest, &cfg, 3, EXTRACTABLE_BUDGET, seed).unwrap();
                assert_eq!(t.violations, 0, "{} seed {seed}", kind.id());
                assert!(t.budgets_respected, "{}", kind.id());
                assert_eq!(t.late_answers, 0);
                if let Some(o) = &t.order {
                    assert!(o.is_ok(), "{}: {:?}", kind.id(), o);
                }
            }
        }
    }
}

#[test]
fn committer_outcomes() {
    let cfg = DeskConfig::new(16, 2);
    let t = zoo_trial(ProtocolId::Extpuf, CommitterKind::Honest, ReceiverKind::Honest, &cfg, 1, EXTRACTABLE_BUDGET, 1).unwrap();
    assert!(t.extraction_correct);
    assert_eq!(t.accepted, vec![Some(t.committed[0].clone())]);

    let t = zoo_trial(ProtocolId::Extpuf, CommitterKind::PufSubstituter, ReceiverKind::Honest, &cfg, 1, EXTRACTABLE_BUDGET, 1).unwrap();
    assert_eq!(t.commit_abort.as_deref(), Some("tq-fail"));

    let t = zoo_trial(ProtocolId::Collextpuf, CommitterKind::RandomDecommit, ReceiverKind::Honest, &cfg, 3, EXTRACTABLE_BUDGET, 2).unwrap();
    assert!(t.accepted.iter().all(Option::is_none));

    let t = zoo_trial(ProtocolId::Extpuf, CommitterKind::PostReturnQuery, ReceiverKind::Honest, &cfg, 1, EXTRACTABLE_BUDGET, 3).unwrap();
    assert!(matches!(t.order, Some(Ok(n)) if n >= 1));
}

#[test]
fn receivers_run_clean() {
    let cfg = DeskConfig::new(16, 2);
    for kind in ReceiverKind::ALL {
        for seed in 0..10 {
            let t = zoo_trial(ProtocolId::Collextpuf, CommitterKind::Honest, kind, &cfg, 2, EXTRACTABLE_BUDGET, seed).unwrap();
            assert_eq!(t.violations, 0);
            assert!(t.budgets_respected);
        }
    }
}

#[test]
fn stateful_puf_e_is_rejected_under_zero_state() {
    let cfg = DeskConfig::new(16, 2);
    let t = zoo_trial(ProtocolId::Extpuf, CommitterKind::Honest, ReceiverKind::StatefulPufE, &cfg, 1, EXTRACTABLE_BUDGET, 0).unwrap();
    assert!(t.construction_rejected, "{:?}", t.commit_abort);
}

#[test]
fn original_attack_is_unconstructible_on_modified_protocols() {
    for target in [ProtocolId::Extpuf, ProtocolId::Collextpuf] {
        let e = attack_original_extpuf(target, SENDER, 1, 0).err().unwrap();
        assert!(matches!(e, AdversaryError::Unconstructible(_)));
    }
}

#[test]
fn zoo_trials_reject_other_protocols() {
    let cfg = DeskConfig::new(16, 2);
    assert!(zoo_trial(ProtocolId::Cpuf, CommitterKind::Honest, ReceiverKind::Honest, &cfg, 1, EXTRACTABLE_BUDGET, 0).is_err());
}

#[test]
fn uc_worlds_run() {
    let cfg = DeskConfig::new(16, 1);
    let real = real_receiver_case(&cfg, true, 5).unwrap();
    let (ideal, sim) = ideal_receiver_case(&cfg, true, 5).unwrap();
    assert!(real.outcome.starts_with("accept:"));
    assert_eq!(real.outcome, ideal.outcome);
    assert!(sim.extracted_e().iter().all(Option::is_some));
    assert_eq!(real.transcript_bits, ideal.transcript_bits);

    let honest = ideal_sender_case(UcSenderKind::Honest, &cfg, false, 5).unwrap();
    assert_eq!(honest.features.outcome, real_sender_case(UcSenderKind::Honest, &cfg, false, 5).unwrap().outcome);
    assert_eq!(honest.decommittable.as_ref().map(Vec::len), Some(1));

    let alt = ideal_sender_case(UcSenderKind::Alternating, &cfg, true, 5).unwrap();
    assert_eq!(alt.decommittable, Some(vec![]));
    assert_eq!(alt.features.outcome, "reject");
}

#[test]
fn e_guessing_rarely_passes_the_equality_test() {
    let cfg = DeskConfig::new(4, 1);
    let runs: Vec<_> = (0..64).map(|s| ideal_sender_case(UcSenderKind::EGuessing, &cfg, s % 2 == 0, s).unwrap()).collect();
    let passed = runs.iter().filter(|r| r.decommittable.is_some()).count();
    assert!(passed < 16, "{passed}");
}

#[test]
fn mixed_blob_pairs_open_both_ways() {
    use puflab::bitlab::BitString;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
    let (blobs, y) = guessing_blobs(&[true, false, true], &mut rng);
    assert_eq!(y.len(), 3);
    let extracted: Vec<Option<BitString>> = blobs
        .shares
        .iter()
        .flat_map(|&(a, b)| [Some(BitString::from_bits(&[a])), Some(BitString::from_bits(&[b]))])
        .collect();
    assert_eq!(decommittable_bits(&extracted), vec![false, true]);
    let mut with_bottom = extracted.clone();
    with_bottom[0] = None;
    assert!(decommittable_bits(&with_bottom).len() <= 1);
}
