use crate::protocols::{CollSession, World};

/// Outcome of the ordering audit on one single-string or collective commit.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OrderAudit {
    /// Committer-side queries to `PUF_E` after its return, all refused.
    pub refused_late_queries: usize,
}

/// Checks that the return of `PUF_E` completes before the receiver sends
/// `r`, and that no party other than the receiver got an answer from the
/// lent `PUF_E` after it was returned.
pub fn check_order_discipline(w: &World, session: &CollSession) -> Result<OrderAudit, String> {
    let log = w.func().log();
    let sid = session.puf_e.0;
    let me = session.receiver.to_string();
    let returned_at = log[session.commit_events.clone()]
        .iter()
        .enumerate()
        .filter(|(_, e)| e.sid == sid && e.kind == "received" && e.handled)
        .map(|(i, _)| session.commit_events.start + i)
        .next_back()
        .ok_or("PUF_E was never handed back")?;
    let r_at = w
        .transcript()
        .iter()
        .filter(|t| t.name == "r" && t.from == session.receiver && t.at_event >= session.commit_events.start)
        .map(|t| t.at_event)
        .next()
        .ok_or("no r message")?;
    if returned_at >= r_at {
        return Err(format!("r sent at event {r_at} before PUF_E returned at event {returned_at}"));
    }
    let mut audit = OrderAudit::default();
    for e in &log[returned_at + 1..] {
        if e.sid != session.puf_e_lent.0 || e.kind != "eval" || e.sender == me {
            continue;
        }
        if e.handled && e.deliveries.iter().any(|d| d.kind == "response") {
            return Err(format!("{} got a PUF_E answer at step {} after the return", e.sender, e.step));
        }
        audit.refused_late_queries += 1;
    }
    Ok(audit)
}
