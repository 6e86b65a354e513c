//! Time series and summary figures over a revision history.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::devfile::{count_raw_lines, DevFile};
use crate::ledger::{AgentId, EventKind, LedgerError, LedgerState, MarketEvent, Tokens};
use crate::time::Instant;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("event {index} of commit {commit} cannot be replayed: {error}")]
    ReplayFailure { commit: usize, index: usize, error: LedgerError },
    #[error("first and last revision have the same timestamp")]
    ZeroElapsed,
    #[error("need at least two timestamped revisions")]
    TooFewRevisions,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    pub commit_index: usize,
    pub line_count: usize,
}

/// Raw line count of every revision, in order.
pub fn growth_series<S: AsRef<str>>(revisions: &[S]) -> Vec<GrowthRow> {
    revisions
        .iter()
        .enumerate()
        .map(|(commit_index, src)| GrowthRow { commit_index, line_count: count_raw_lines(src.as_ref()) })
        .collect()
}

pub fn growth_csv(rows: &[GrowthRow]) -> Result<String, MetricsError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["commit_index", "line_count"])?;
    for r in rows {
        w.write_record([r.commit_index.to_string(), r.line_count.to_string()])?;
    }
    Ok(finish(w))
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output is built from strings")
}

/// Per-agent figures after one commit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgentFigures {
    pub balance: Tokens,
    pub cum_collected: Tokens,
    /// Collected since the agent's last balance reset.
    pub cum_collected_reset: Tokens,
    pub cum_locks: u64,
    pub cum_bounties_made: Tokens,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub commit_index: usize,
    pub agents: BTreeMap<AgentId, AgentFigures>,
}

/// Replay `commits` on `initial` and record every agent's figures after
/// each commit. An `AdminAdjust` on an agent is a balance-reset point: the
/// `_reset` series restarts from zero there.
pub fn agent_history(initial: &LedgerState, commits: &[&[MarketEvent]]) -> Result<Vec<Snapshot>, MetricsError> {
    let mut state = initial.clone();
    let mut figures: BTreeMap<AgentId, AgentFigures> =
        state.balances.iter().map(|(a, b)| (a.clone(), AgentFigures { balance: *b, ..Default::default() })).collect();
    let mut rows = Vec::with_capacity(commits.len());
    for (commit, events) in commits.iter().enumerate() {
        for (index, e) in events.iter().enumerate() {
            let paid_before = state.collected.len();
            state.apply(e).map_err(|error| MetricsError::ReplayFailure { commit, index, error })?;
            for c in &state.collected[paid_before..] {
                let f = figures.entry(c.agent.clone()).or_default();
                f.cum_collected += c.amount;
                f.cum_collected_reset += c.amount;
            }
            let Some(agent) = e.agent.agent() else { continue };
            let f = figures.entry(agent.clone()).or_default();
            match e.kind {
                EventKind::Lock => f.cum_locks += 1,
                EventKind::PlaceSubBounty => f.cum_bounties_made += e.amount,
                EventKind::AdminAdjust => f.cum_collected_reset = 0,
                _ => {}
            }
        }
        for (agent, f) in figures.iter_mut() {
            f.balance = state.balance(agent).unwrap_or(0);
        }
        rows.push(Snapshot { commit_index: commit, agents: figures.clone() });
    }
    Ok(rows)
}

/// Column headers for the given agents, names lowercased.
pub fn agent_history_header(agents: &[AgentId]) -> Vec<String> {
    let mut h = vec!["commit_index".to_string()];
    for a in agents {
        let n = a.as_str().to_lowercase();
        h.push(format!("balance_{n}"));
        h.push(format!("cum_collected_{n}"));
        h.push(format!("cum_collected_{n}_reset"));
        h.push(format!("cum_locks_{n}"));
        h.push(format!("cum_bounties_made_{n}"));
    }
    h
}

pub fn agent_history_csv(rows: &[Snapshot]) -> Result<String, MetricsError> {
    let agents: Vec<AgentId> = rows.last().map(|r| r.agents.keys().cloned().collect()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(agent_history_header(&agents))?;
    for r in rows {
        let mut rec = vec![r.commit_index.to_string()];
        for a in &agents {
            let f = r.agents.get(a).cloned().unwrap_or_default();
            rec.push(f.balance.to_string());
            rec.push(f.cum_collected.to_string());
            rec.push(f.cum_collected_reset.to_string());
            rec.push(f.cum_locks.to_string());
            rec.push(f.cum_bounties_made.to_string());
        }
        w.write_record(&rec)?;
    }
    Ok(finish(w))
}

/// Lines per day between two measurements, to three significant figures.
pub fn throughput(first: (Instant, usize), last: (Instant, usize)) -> Result<f64, MetricsError> {
    let secs = (last.0 - first.0).num_seconds();
    if secs == 0 {
        return Err(MetricsError::ZeroElapsed);
    }
    let days = secs as f64 / 86_400.0;
    Ok(round_sig((last.1 as f64 - first.1 as f64) / days, 3))
}

/// [`throughput`] from the first to the last of timestamped revisions,
/// measured in normalized lines.
pub fn throughput_of(revisions: &[(Instant, &DevFile)]) -> Result<f64, MetricsError> {
    match (revisions.first(), revisions.last()) {
        (Some(a), Some(b)) if revisions.len() >= 2 => {
            throughput((a.0, a.1.normalized_line_count), (b.0, b.1.normalized_line_count))
        }
        _ => Err(MetricsError::TooFewRevisions),
    }
}

pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}
