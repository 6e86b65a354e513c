use std::fmt;
use std::str::FromStr;

use super::{Account, LedgerError, Tokens};
use crate::time::{format_instant, parse_instant, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    PlaceBounty,
    PlaceSubBounty,
    Lock,
    RemoveExpiredLock,
    Collect,
    AdminAdjust,
    RemoveBounty,
    MarkProved,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::PlaceBounty,
        EventKind::PlaceSubBounty,
        EventKind::Lock,
        EventKind::RemoveExpiredLock,
        EventKind::Collect,
        EventKind::AdminAdjust,
        EventKind::RemoveBounty,
        EventKind::MarkProved,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::PlaceBounty => "PlaceBounty",
            EventKind::PlaceSubBounty => "PlaceSubBounty",
            EventKind::Lock => "Lock",
            EventKind::RemoveExpiredLock => "RemoveExpiredLock",
            EventKind::Collect => "Collect",
            EventKind::AdminAdjust => "AdminAdjust",
            EventKind::RemoveBounty => "RemoveBounty",
            EventKind::MarkProved => "MarkProved",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

/// One market transition.
///
/// `agent` is the acting account: the bounty creator, the locker, the
/// prover (for `Collect`; the payee is decided on replay), the lock holder
/// (for `RemoveExpiredLock`) or the adjusted agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarketEvent {
    pub time: Instant,
    pub kind: EventKind,
    pub agent: Account,
    pub item: Option<String>,
    pub amount: Tokens,
    /// Lock expiry, when it differs from the default duration.
    pub expires: Option<Instant>,
    /// Free text; used by `AdminAdjust`.
    pub reason: Option<String>,
}

impl fmt::Display for MarketEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            format_instant(self.time),
            self.kind,
            self.agent,
            self.item.as_deref().unwrap_or("-"),
            self.amount
        )?;
        if let Some(e) = self.expires {
            write!(f, " until={}", format_instant(e))?;
        }
        if let Some(r) = self.reason.as_deref().filter(|r| !r.is_empty()) {
            write!(f, " {r}")?;
        }
        Ok(())
    }
}

/// A parsed event log. Lines `# commit` group the events into commits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventLog {
    pub events: Vec<MarketEvent>,
    /// Exclusive end index into `events` for each explicit commit group.
    pub commit_ends: Vec<usize>,
    /// Whether the log contained any `# commit` marker.
    pub grouped: bool,
}

impl EventLog {
    /// Event groups, one per commit. Without markers every event is its
    /// own commit.
    pub fn commits(&self) -> Vec<&[MarketEvent]> {
        if !self.grouped {
            return self.events.chunks(1).collect();
        }
        let mut start = 0;
        let mut out = Vec::new();
        for &end in &self.commit_ends {
            out.push(&self.events[start..end]);
            start = end;
        }
        if start < self.events.len() {
            out.push(&self.events[start..]);
        }
        out
    }
}

fn bad(line: usize, reason: impl Into<String>) -> LedgerError {
    LedgerError::BadEvent { line, reason: reason.into() }
}

/// Parse `<RFC3339> <kind> <agent> <item> <amount>` lines.
pub fn parse_event_log(text: &str) -> Result<EventLog, LedgerError> {
    let mut log = EventLog::default();
    let mut last: Option<Instant> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if comment.trim() == "commit" {
                log.grouped = true;
                if !log.events.is_empty() {
                    log.commit_ends.push(log.events.len());
                }
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 5 {
            return Err(bad(line, "expected `<time> <kind> <agent> <item> <amount>`"));
        }
        let time = parse_instant(fields[0]).map_err(|e| bad(line, e.to_string()))?;
        if last.is_some_and(|l| time < l) {
            return Err(bad(line, "timestamps must be nondecreasing"));
        }
        last = Some(time);
        let kind: EventKind = fields[1].parse().map_err(|e: String| bad(line, e))?;
        let agent = Account::parse(fields[2]).map_err(|e| bad(line, e.to_string()))?;
        let item = (fields[3] != "-").then(|| fields[3].to_string());
        let amount: Tokens = fields[4].parse().map_err(|_| bad(line, format!("bad amount `{}`", fields[4])))?;
        let mut rest = &fields[5..];
        let mut expires = None;
        if let Some(until) = rest.first().and_then(|w| w.strip_prefix("until=")) {
            expires = Some(parse_instant(until).map_err(|e| bad(line, e.to_string()))?);
            rest = &rest[1..];
        }
        let reason = (!rest.is_empty()).then(|| rest.join(" "));
        log.events.push(MarketEvent { time, kind, agent, item, amount, expires, reason });
    }
    log.commit_ends.dedup();
    Ok(log)
}

pub fn format_event_log(events: &[MarketEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}
