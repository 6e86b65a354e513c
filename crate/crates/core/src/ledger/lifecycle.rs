use std::collections::BTreeMap;

use chrono::Duration;

use super::{Account, AgentId, EventKind, MarketEvent, Tokens};
use crate::time::Instant;

/// Where the tokens of agent-created bounties ended up.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LifecycleReport {
    pub placed_total: Tokens,
    /// Collected by the agent that created the bounty.
    pub self_collected: Tokens,
    /// Collected by a different agent.
    pub cross_collected: Tokens,
    pub still_open: Tokens,
    /// Withdrawn without a collection.
    pub removed: Tokens,
}

impl LifecycleReport {
    pub fn is_partition(&self) -> bool {
        self.placed_total == self.self_collected + self.cross_collected + self.still_open + self.removed
    }
}

/// Follow every agent-created bounty from placement to its fate. Admin
/// bounties have no identifiable creator and are left out.
pub fn lifecycle_report(events: &[MarketEvent]) -> LifecycleReport {
    let mut open: BTreeMap<&str, (&AgentId, Tokens)> = BTreeMap::new();
    let mut locks: BTreeMap<&str, (&AgentId, Instant)> = BTreeMap::new();
    let mut report = LifecycleReport::default();
    for e in events {
        let Some(item) = e.item.as_deref() else { continue };
        match (e.kind, &e.agent) {
            (EventKind::PlaceSubBounty, Account::Agent(creator)) => {
                open.insert(item, (creator, e.amount));
                report.placed_total += e.amount;
            }
            (EventKind::Lock, Account::Agent(holder)) => {
                let expires = e.expires.unwrap_or(e.time + Duration::hours(24));
                locks.insert(item, (holder, expires));
            }
            (EventKind::RemoveExpiredLock, _) => {
                locks.remove(item);
            }
            (EventKind::Collect, Account::Agent(prover)) => {
                let payee = match locks.remove(item) {
                    Some((holder, expires)) if expires >= e.time => holder,
                    _ => prover,
                };
                if let Some((creator, amount)) = open.remove(item) {
                    if payee == creator {
                        report.self_collected += amount;
                    } else {
                        report.cross_collected += amount;
                    }
                }
            }
            (EventKind::RemoveBounty, _) => {
                locks.remove(item);
                if let Some((_, amount)) = open.remove(item) {
                    report.removed += amount;
                }
            }
            _ => {}
        }
    }
    report.still_open = open.values().map(|(_, a)| a).sum();
    report
}
