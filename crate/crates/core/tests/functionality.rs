use std::sync::Arc;

use puflab::bitlab::BitString;
use puflab::functionality::*;
use puflab::pufmodel::programs::{EchoMsg, Leaker, QueryLogger};
use puflab::pufmodel::{PufError, PufParams, PufProgram};
use proptest::prelude::*;

const P1: Party = SENDER;
const P2: Party = RECEIVER;
const ADV: Party = Party::Adversary;

fn family() -> PufParams {
    PufParams::new(8, 16, 3, 2, 8).unwrap()
}

fn func(budget: CommBudget) -> PufFunctionality {
    PufFunctionality::new(FuncConfig::communicating(budget), 1)
}

fn init(f: &mut PufFunctionality, sid: u64, from: Party) -> Vec<Delivery> {
    f.handle(FuncMsg::InitHonest { sid: Sid(sid), from, params: family() }).unwrap()
}

fn eval(f: &mut PufFunctionality, sid: u64, from: Party) -> Vec<Delivery> {
    f.handle(FuncMsg::Eval { sid: Sid(sid), from, challenge: BitString::zeros(8) }).unwrap()
}

fn responded(d: &[Delivery], to: Party) -> bool {
    d.iter().any(|d| matches!(d, Delivery::Response { to: t, response: Some(_), .. } if *t == to))
}

#[test]
fn second_init_is_ignored() {
    let mut f = func(CommBudget::STATELESS);
    assert_eq!(init(&mut f, 1, P1), vec![Delivery::Initialized { sid: Sid(1), to: P1 }]);
    assert!(init(&mut f, 1, P2).is_empty());
    assert_eq!(f.owner(Sid(1)), Some(P1));
    assert!(!f.log()[1].handled);
}

#[test]
fn only_the_owner_evaluates() {
    let mut f = func(CommBudget::STATELESS);
    init(&mut f, 1, P1);
    assert!(responded(&eval(&mut f, 1, P1), P1));
    assert!(eval(&mut f, 1, P2).is_empty());
    assert!(eval(&mut f, 1, ADV).is_empty());
    assert!(eval(&mut f, 2, P1).is_empty());
}

#[test]
fn handover_moves_evaluation_rights() {
    let mut f = func(CommBudget::STATELESS);
    init(&mut f, 1, P1);
    let d = f.handle(FuncMsg::Handover { sid: Sid(1), from: P1, to: P2 }).unwrap();
    assert_eq!(d, vec![Delivery::Invoke { sid: Sid(1), from: P1, to: P2 }]);
    assert_eq!(f.in_transit(Sid(1)), Some((P1, P2)));
    assert!(eval(&mut f, 1, P1).is_empty());
    assert!(eval(&mut f, 1, P2).is_empty());
    assert!(responded(&eval(&mut f, 1, ADV), ADV));
    let d = f.handle(FuncMsg::Ready { sid: Sid(1), from: ADV }).unwrap();
    assert_eq!(d, vec![Delivery::HandedOver { sid: Sid(1), to: P2, from: P1 }]);
    assert!(responded(&eval(&mut f, 1, P2), P2));
    assert!(eval(&mut f, 1, P1).is_empty());
    assert!(eval(&mut f, 1, ADV).is_empty());
    let d = f.handle(FuncMsg::Received { sid: Sid(1), from: ADV, pi: P1 }).unwrap();
    assert_eq!(d, vec![Delivery::ReceivedAck { sid: Sid(1), to: P1 }]);
    assert!(f.handle(FuncMsg::Received { sid: Sid(1), from: ADV, pi: P1 }).unwrap().is_empty());
    assert!(audit_log(f.log(), &CommBudget::STATELESS).is_ok());
}

#[test]
fn ready_only_from_the_adversary() {
    let mut f = func(CommBudget::STATELESS);
    init(&mut f, 1, P1);
    f.handle(FuncMsg::Handover { sid: Sid(1), from: P1, to: P2 }).unwrap();
    assert!(f.handle(FuncMsg::Ready { sid: Sid(1), from: P2 }).unwrap().is_empty());
    assert!(f.handle(FuncMsg::Handover { sid: Sid(1), from: P1, to: P2 }).unwrap().is_empty());
}

#[test]
fn honest_evaluations_are_tapped() {
    let mut f = func(CommBudget::STATELESS);
    init(&mut f, 1, P1);
    eval(&mut f, 1, P1);
    eval(&mut f, 1, P2);
    assert_eq!(f.tap().len(), 1);
    assert_eq!(f.tap()[0].querier, P1);
}

fn malicious(f: &mut PufFunctionality, program: Arc<dyn PufProgram>) {
    let d = f.handle(FuncMsg::InitMalicious { sid: Sid(1), from: P1, program, inner: family() }).unwrap();
    assert_eq!(d.len(), 1);
}

#[test]
fn creator_messages_respect_k_in_and_k_out() {
    let mut f = func(CommBudget { k_state: Some(0), k_in: Some(12), k_out: Some(8) });
    malicious(&mut f, Arc::new(EchoMsg));
    let msg = |f: &mut PufFunctionality, from: Party, bits: usize| {
        f.handle(FuncMsg::InMsg { sid: Sid(1), from, payload: BitString::ones(bits) }).unwrap()
    };
    assert_eq!(msg(&mut f, P1, 8), vec![Delivery::OutMsg { sid: Sid(1), to: P1, payload: BitString::ones(8) }]);
    // k_out is spent, so the echo is dropped.
    assert!(msg(&mut f, P1, 4).is_empty());
    assert!(f.log().last().unwrap().note.as_deref().unwrap().contains("k_out"));
    // k_in would reach 13.
    assert!(msg(&mut f, P1, 1).is_empty());
    assert!(!f.log().last().unwrap().handled);
    assert!(msg(&mut f, P2, 1).is_empty());
    assert!(audit_log(f.log(), &f.config().budget).is_ok());
}

#[test]
fn leaks_reach_only_the_creator() {
    let mut f = func(CommBudget::UNBOUNDED);
    malicious(&mut f, Arc::new(Leaker));
    f.handle(FuncMsg::Handover { sid: Sid(1), from: P1, to: P2 }).unwrap();
    f.handle(FuncMsg::Ready { sid: Sid(1), from: ADV }).unwrap();
    let d = eval(&mut f, 1, P2);
    assert!(d.contains(&Delivery::OutMsg { sid: Sid(1), to: P1, payload: BitString::zeros(8) }));
    assert!(audit_log(f.log(), &CommBudget::UNBOUNDED).is_ok());
    assert!(audit_log(f.log(), &CommBudget::STATELESS).is_err());
}

#[test]
fn non_communicating_flavor() {
    let mut f = PufFunctionality::new(FuncConfig::non_communicating(Some(0)), 1);
    malicious(&mut f, Arc::new(Leaker));
    let d = eval(&mut f, 1, P1);
    assert_eq!(d.len(), 1);
    let e = f.handle(FuncMsg::InMsg { sid: Sid(1), from: P1, payload: BitString::ones(1) }).unwrap_err();
    assert!(e.to_string().starts_with("MALFORMED"));
}

#[test]
fn stateful_program_is_rejected_under_zero_state() {
    let mut f = func(CommBudget::STATELESS);
    let program = Arc::new(QueryLogger { challenge_len: 8, rg: 16 });
    let e = f.handle(FuncMsg::InitMalicious { sid: Sid(1), from: P1, program, inner: family() }).unwrap_err();
    assert_eq!(e, FuncError::Puf(PufError::StateBudget { needed: 8, allowed: 0 }));
    assert_eq!(f.owner(Sid(1)), None);
}

#[test]
fn event_log_is_seed_stable() {
    let run = || {
        let mut f = func(CommBudget::STATELESS);
        init(&mut f, 1, P1);
        eval(&mut f, 1, P1);
        f.handle(FuncMsg::Handover { sid: Sid(1), from: P1, to: P2 }).unwrap();
        eval(&mut f, 1, ADV);
        f.log_jsonl()
    };
    assert_eq!(run(), run());
    assert_eq!(run().lines().count(), 4);
}

#[test]
fn fcom_opens_the_first_commitment() {
    let mut c = FCom::new();
    assert_eq!(c.handle(P1, FComMsg::Commit(false)).len(), 2);
    assert_eq!(c.handle(P1, FComMsg::Open)[0], FComDelivery::Opened { to: P2, bit: false });
    let mut c = FCom::new();
    c.handle(P1, FComMsg::Commit(true));
    assert!(c.handle(P1, FComMsg::Commit(false)).is_empty());
    assert_eq!(c.handle(P1, FComMsg::Open)[0], FComDelivery::Opened { to: P2, bit: true });
    assert!(c.halted());
    assert!(c.handle(P1, FComMsg::Open).is_empty());
}

#[test]
fn fcom_guards() {
    let mut c = FCom::new();
    assert!(c.handle(P1, FComMsg::Open).is_empty());
    assert!(c.handle(P2, FComMsg::Commit(true)).is_empty());
    assert_eq!(c.committed(), None);
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Eval(u8),
    Handover(u8, u8),
    Ready(u8),
}

fn party(i: u8) -> Party {
    match i % 3 {
        0 => P1,
        1 => P2,
        _ => ADV,
    }
}

/// Transfer rules as a table: who may evaluate, who may hand over, and where the PUF goes.
#[derive(Default)]
struct Model {
    owner: Option<Party>,
    transit_to: Option<Party>,
}

impl Model {
    fn eval(&self, p: Party) -> bool {
        self.owner == Some(p) || (p == ADV && self.transit_to.is_some())
    }
    fn handover(&mut self, from: Party, to: Party) -> bool {
        if self.owner != Some(from) {
            return false;
        }
        self.owner = None;
        self.transit_to = Some(to);
        true
    }
    fn ready(&mut self, from: Party) -> bool {
        if from != ADV || self.transit_to.is_none() {
            return false;
        }
        self.owner = self.transit_to.take();
        true
    }
}

proptest! {
    #[test]
    fn transfers_follow_the_table(ops in prop::collection::vec(
        prop_oneof![
            any::<u8>().prop_map(Op::Eval),
            (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Op::Handover(a, b)),
            any::<u8>().prop_map(Op::Ready),
        ],
        0..40,
    )) {
        let mut f = func(CommBudget::STATELESS);
        init(&mut f, 1, P1);
        let mut m = Model { owner: Some(P1), transit_to: None };
        for op in ops {
            match op {
                Op::Eval(p) => {
                    let expect = m.eval(party(p));
                    prop_assert_eq!(responded(&eval(&mut f, 1, party(p)), party(p)), expect);
                }
                Op::Handover(a, b) => {
                    let expect = m.handover(party(a), party(b));
                    let d = f.handle(FuncMsg::Handover { sid: Sid(1), from: party(a), to: party(b) }).unwrap();
                    prop_assert_eq!(!d.is_empty(), expect);
                }
                Op::Ready(p) => {
                    let expect = m.ready(party(p));
                    let d = f.handle(FuncMsg::Ready { sid: Sid(1), from: party(p) }).unwrap();
                    prop_assert_eq!(!d.is_empty(), expect);
                }
            }
            prop_assert_eq!(f.owner(Sid(1)), m.owner);
        }
        prop_assert!(audit_log(f.log(), &CommBudget::STATELESS).is_ok());
    }
}
