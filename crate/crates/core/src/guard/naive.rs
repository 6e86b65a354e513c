//! The first-generation checker: regular expressions over raw lines.
//!
//! Kept for differential testing. It knows nothing about comments, so a
//! `Qed.` inside a comment counts as a real one, and it compares lock
//! expiries as strings, which breaks on non-UTC offsets.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;

use super::{Violation, ViolationCode};
use crate::ledger::Rules;
use crate::time::{format_instant, Instant};

struct Patterns {
    balance: Regex,
    bounty: Regex,
    sub_bounty: Regex,
    collected: Regex,
    lock: Regex,
    header: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        balance: Regex::new(r"BALANCE:\s*(\S+)\s+(-?\d+)").unwrap(),
        bounty: Regex::new(r"\bBOUNTY:\s*(-?\d+)").unwrap(),
        sub_bounty: Regex::new(r"SUBBOUNTY:\s*\S+\s+(-?\d+)").unwrap(),
        collected: Regex::new(r"COLLECTED:\s*(\S+)\s+(-?\d+)").unwrap(),
        lock: Regex::new(r"LOCK:\s*(\S+)\s+UNTIL\s+([^\s*]+)").unwrap(),
        header: Regex::new(r"^\s*(?:Theorem|Lemma)\s+([A-Za-z0-9_']+)").unwrap(),
    })
}

#[derive(Default)]
struct Current {
    name: String,
    collect: bool,
    status: Option<&'static str>,
}

fn close(item: Option<Current>, out: &mut Vec<Violation>) {
    if let Some(c) = item {
        if c.collect && c.status != Some("Qed") {
            out.push(Violation {
                code: ViolationCode::CollectWithoutQed,
                item: Some(c.name),
                detail: "no Qed line after the collection".into(),
            });
        }
    }
}

/// Check the proposed file line by line. Only the proposed side is read.
pub fn naive_line_check(_previous: &str, proposed: &str, now: Instant, rules: &Rules) -> Vec<Violation> {
    let p = patterns();
    let mut out = Vec::new();
    let horizon = format_instant(now + rules.lock_duration);
    let mut locks: BTreeMap<String, usize> = BTreeMap::new();
    let mut pending_collect = false;
    let mut current: Option<Current> = None;

    for line in proposed.lines() {
        if let Some(c) = p.balance.captures(line) {
            if c[2].parse::<i64>().is_ok_and(|b| b < 0) {
                out.push(Violation { code: ViolationCode::NegativeBalance, item: None, detail: line.trim().into() });
            }
        }
        for re in [&p.bounty, &p.sub_bounty] {
            if let Some(c) = re.captures(line) {
                if c[1].parse::<i64>().map_or(true, |b| b <= 0) {
                    out.push(Violation { code: ViolationCode::NonPositiveBounty, item: None, detail: line.trim().into() });
                }
            }
        }
        if let Some(c) = p.collected.captures(line) {
            pending_collect = true;
            if c[2].parse::<i64>().map_or(true, |b| b <= 0) {
                out.push(Violation { code: ViolationCode::NonPositiveBounty, item: None, detail: line.trim().into() });
            }
        }
        if let Some(c) = p.lock.captures(line) {
            *locks.entry(c[1].to_string()).or_insert(0) += 1;
            if c[2] > *horizon.as_str() {
                out.push(Violation { code: ViolationCode::LockExpiryTooFar, item: None, detail: line.trim().into() });
            }
        }
        if let Some(c) = p.header.captures(line) {
            close(current.take(), &mut out);
            current = Some(Current { name: c[1].to_string(), collect: pending_collect, status: None });
            pending_collect = false;
        }
        if let Some(cur) = current.as_mut() {
            if cur.status.is_none() {
                if line.contains("Qed.") {
                    cur.status = Some("Qed");
                } else if line.contains("Admitted.") {
                    cur.status = Some("Admitted");
                }
            }
        }
    }
    close(current, &mut out);
    for (agent, n) in locks {
        if n > rules.max_locks {
            out.push(Violation { code: ViolationCode::LockCountExceeded, item: None, detail: format!("{agent} holds {n} locks") });
        }
    }
    out
}
