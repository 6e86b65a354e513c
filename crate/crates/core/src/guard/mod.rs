//! Revision guard: judge a proposed revision of the development against
//! its predecessor before it is committed.
//!
//! The check is a pure function of the two files, the committing agent and
//! the current instant. It reports every violation it finds rather than
//! stopping at the first one. Ledger changes are reconstructed by diffing
//! annotations item by item; the reconstructed events are replayed on the
//! previous ledger and the result must match what the proposed file states.
//! An item or agent already covered by a specific violation is left out of
//! that final comparison so one mistake yields one code.

mod naive;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use naive::naive_line_check;

use crate::depgraph::{build_graph, AxiomIndex, ProofClass};
use crate::devfile::{DevFile, DevFileError, Item, ItemKind};
use crate::ledger::{Account, AgentId, LedgerError, LedgerState, MarketEvent, Rules, Tokens};
use crate::time::{format_instant, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    StatementMutated,
    DefinitionMutated,
    ForeignLockTouched,
    ForeignProofOverwrittenWhileLocked,
    BalanceTransitionInvalid,
    LockCountExceeded,
    LockExpiryTooFar,
    NegativeBalance,
    NonPositiveBounty,
    CollectWithoutQed,
    CollectWrongBeneficiary,
    KeywordInCommentAbuse,
    ItemDeleted,
    AxiomIntroduced,
}

impl ViolationCode {
    pub const ALL: [ViolationCode; 14] = [
        ViolationCode::StatementMutated,
        ViolationCode::DefinitionMutated,
        ViolationCode::ForeignLockTouched,
        ViolationCode::ForeignProofOverwrittenWhileLocked,
        ViolationCode::BalanceTransitionInvalid,
        ViolationCode::LockCountExceeded,
        ViolationCode::LockExpiryTooFar,
        ViolationCode::NegativeBalance,
        ViolationCode::NonPositiveBounty,
        ViolationCode::CollectWithoutQed,
        ViolationCode::CollectWrongBeneficiary,
        ViolationCode::KeywordInCommentAbuse,
        ViolationCode::ItemDeleted,
        ViolationCode::AxiomIntroduced,
    ];
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub code: ViolationCode,
    pub item: Option<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.code, self.item.as_deref().unwrap_or("-"), self.detail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Previous,
    Proposed,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Previous => "previous",
            Side::Proposed => "proposed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuardError {
    #[error("{side} revision does not parse: {error}")]
    ParseFailure { side: Side, error: DevFileError },
}

/// Everything a check needs.
#[derive(Clone, Debug)]
pub struct RevisionPair<'a> {
    pub previous: &'a DevFile,
    pub proposed: &'a DevFile,
    pub committer: AgentId,
    pub now: Instant,
    pub rules: Rules,
    pub allowed_axioms: AxiomIndex,
}

impl<'a> RevisionPair<'a> {
    pub fn new(previous: &'a DevFile, proposed: &'a DevFile, committer: AgentId, now: Instant) -> Self {
        RevisionPair { previous, proposed, committer, now, rules: Rules::default(), allowed_axioms: AxiomIndex::default() }
    }
}

/// Outcome of a check: violations plus the market events the revision
/// implies, in replay order.
#[derive(Clone, Debug, Default)]
pub struct Verdict {
    pub violations: Vec<Violation>,
    pub events: Vec<MarketEvent>,
}

impl Verdict {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn codes(&self) -> BTreeSet<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }
}

/// All violations of a revision; empty means accept.
pub fn check_revision(pair: &RevisionPair<'_>) -> Vec<Violation> {
    analyze(pair).violations
}

/// Parse both sides, then [`analyze`].
pub fn check_sources(
    previous: &str,
    proposed: &str,
    committer: AgentId,
    now: Instant,
    rules: Rules,
    allowed_axioms: AxiomIndex,
) -> Result<Verdict, GuardError> {
    let prev = DevFile::from_source(previous).map_err(|error| GuardError::ParseFailure { side: Side::Previous, error })?;
    let next = DevFile::from_source(proposed).map_err(|error| GuardError::ParseFailure { side: Side::Proposed, error })?;
    let pair = RevisionPair { previous: &prev, proposed: &next, committer, now, rules, allowed_axioms };
    Ok(analyze(&pair))
}

struct Findings {
    violations: Vec<Violation>,
    items: BTreeSet<String>,
    agents: BTreeSet<AgentId>,
}

impl Findings {
    fn flag(&mut self, code: ViolationCode, item: Option<&str>, detail: impl Into<String>) {
        let v = Violation { code, item: item.map(str::to_string), detail: detail.into() };
        if let Some(name) = item {
            self.items.insert(name.to_string());
        }
        if !self.violations.contains(&v) {
            self.violations.push(v);
        }
    }

    fn ledger_error(&mut self, item: &str, err: LedgerError) {
        use ViolationCode::*;
        let code = match &err {
            LedgerError::InsufficientBalance { account, .. } => {
                if let Account::Agent(a) = account {
                    self.agents.insert(a.clone());
                }
                NegativeBalance
            }
            LedgerError::NonPositiveAmount(_) => NonPositiveBounty,
            LedgerError::LockLimitExceeded(a) => {
                self.agents.insert(a.clone());
                LockCountExceeded
            }
            LedgerError::InvalidLockExpiry { .. } => LockExpiryTooFar,
            LedgerError::NotProved(_) => CollectWithoutQed,
            LedgerError::AlreadyLocked { .. } => ForeignLockTouched,
            _ => BalanceTransitionInvalid,
        };
        self.flag(code, Some(item), err.to_string());
    }
}

fn multiset<'a>(xs: impl IntoIterator<Item = &'a String>) -> BTreeMap<&'a str, usize> {
    let mut m = BTreeMap::new();
    for x in xs {
        *m.entry(x.as_str()).or_insert(0) += 1;
    }
    m
}

/// Run every check and reconstruct the implied market events.
pub fn analyze(pair: &RevisionPair<'_>) -> Verdict {
    use ViolationCode::*;
    let RevisionPair { previous: prev, proposed: next, committer, now, rules, allowed_axioms } = pair;
    let now = *now;
    let is_admin = committer.is_admin();
    let mut f = Findings { violations: Vec::new(), items: BTreeSet::new(), agents: BTreeSet::new() };

    // Statements are immutable and items are never deleted.
    for p in &prev.items {
        let Some(n) = next.item(&p.name) else {
            f.flag(ItemDeleted, Some(&p.name), format!("{} removed", p.kind));
            continue;
        };
        let changed = p.kind != n.kind || p.statement_text != n.statement_text;
        if changed && (p.kind == ItemKind::Definition || n.kind == ItemKind::Definition) {
            f.flag(DefinitionMutated, Some(&p.name), format!("was `{}`", p.statement_text));
        } else if changed {
            f.flag(StatementMutated, Some(&p.name), format!("was `{}`", p.statement_text));
        }
    }
    for n in &next.items {
        if n.kind == ItemKind::Axiom && prev.item(&n.name).is_none() {
            f.flag(AxiomIntroduced, Some(&n.name), "new axioms are not allowed");
        }
    }

    // Marker text inside comments that the parser does not treat as an annotation.
    let mut known = multiset(&prev.stray_markers);
    for s in &next.stray_markers {
        match known.get_mut(s.as_str()) {
            Some(k) if *k > 0 => *k -= 1,
            _ => f.flag(KeywordInCommentAbuse, None, format!("marker inside a non-annotation comment: {s}")),
        }
    }

    // Static checks on the proposed ledger.
    for (agent, balance) in &next.balances {
        if *balance < 0 {
            f.agents.insert(agent.clone());
            f.flag(NegativeBalance, None, format!("{agent} has {balance}"));
        }
    }
    let next_ledger = LedgerState::from_devfile(next, rules.clone());
    if next.supply.is_some() && next_ledger.admin_sink < 0 {
        f.flag(NegativeBalance, None, format!("admin sink has {}", next_ledger.admin_sink));
    }
    let mut lock_counts: BTreeMap<&AgentId, usize> = BTreeMap::new();
    for item in &next.items {
        let mut bounties = 0;
        let mut locks = 0;
        for a in &item.annotations {
            use crate::devfile::AnnotationKind as K;
            match &a.kind {
                K::Bounty { amount } | K::SubBounty { amount, .. } => {
                    bounties += 1;
                    if *amount <= 0 {
                        f.flag(NonPositiveBounty, Some(&item.name), format!("bounty of {amount}"));
                    }
                }
                K::Collected { amount, .. } if *amount <= 0 => {
                    f.flag(NonPositiveBounty, Some(&item.name), format!("collection of {amount}"));
                }
                K::Lock { agent, expires } => {
                    locks += 1;
                    *lock_counts.entry(agent).or_insert(0) += 1;
                    let carried = prev.item(&item.name).and_then(|p| p.lock()) == Some((agent, *expires));
                    if !carried && (*expires < now || *expires > now + rules.lock_duration) {
                        f.flag(
                            LockExpiryTooFar,
                            Some(&item.name),
                            format!("expiry {} outside [now, now + {}h]", format_instant(*expires), rules.lock_duration.num_hours()),
                        );
                    }
                }
                _ => {}
            }
        }
        if bounties > 1 {
            f.flag(BalanceTransitionInvalid, Some(&item.name), "more than one bounty annotation");
        }
        if locks > 1 {
            f.flag(BalanceTransitionInvalid, Some(&item.name), "more than one lock annotation");
        }
    }
    for (agent, count) in lock_counts {
        if count > rules.max_locks {
            f.agents.insert(agent.clone());
            f.flag(LockCountExceeded, None, format!("{agent} holds {count} locks (max {})", rules.max_locks));
        }
    }

    // Others' live locks persist; their partial proofs may not be replaced.
    for p in &prev.items {
        let (Some((holder, expires)), Some(n)) = (p.lock(), next.item(&p.name)) else { continue };
        if expires < now || holder == committer {
            continue;
        }
        let collected_now = n.collected().count() > p.collected().count();
        if n.lock() != Some((holder, expires)) && !collected_now {
            f.flag(ForeignLockTouched, Some(&p.name), format!("lock of {holder} changed"));
        }
        if p.has_proof_body() && n.canonical_proof() != p.canonical_proof() {
            f.flag(ForeignProofOverwrittenWhileLocked, Some(&p.name), format!("proof in progress by {holder}"));
        }
    }

    // Replay the implied events on the previous ledger.
    let classes = build_graph(next, allowed_axioms).classify();
    let mut state = LedgerState::from_devfile(prev, rules.clone());
    let history = state.log.len();
    state.expire_locks(now).expect("derived ledger clock starts at the epoch");
    let committer_account = Account::from(committer.clone());
    for n in &next.items {
        if f.items.contains(&n.name) {
            continue;
        }
        infer_item(&mut f, &mut state, prev.item(&n.name), n, committer, &committer_account, now, &classes);
    }

    if is_admin {
        let agents: BTreeSet<AgentId> = next.balances.iter().map(|(a, _)| a.clone()).collect();
        for agent in agents.difference(&f.agents.clone()) {
            let actual = next_ledger.balance(agent).unwrap_or(0);
            let expected = state.balance(agent).unwrap_or(0);
            if actual != expected {
                if let Err(err) = state.admin_adjust(agent, actual - expected, "inferred from revision", now) {
                    f.agents.insert(agent.clone());
                    f.flag(NegativeBalance, None, err.to_string());
                }
            }
        }
    }

    // once one of the committer's changes is rejected their balance can no
    // longer be reconstructed
    if !f.items.is_empty() {
        f.agents.insert(committer.clone());
    }
    compare(&mut f, prev, next, &state, &next_ledger, is_admin, now);

    Verdict { violations: f.violations, events: state.log[history..].to_vec() }
}

#[allow(clippy::too_many_arguments)]
fn infer_item(
    f: &mut Findings,
    state: &mut LedgerState,
    prev: Option<&Item>,
    next: &Item,
    committer: &AgentId,
    committer_account: &Account,
    now: Instant,
    classes: &Result<BTreeMap<String, ProofClass>, crate::depgraph::DepGraphError>,
) {
    use ViolationCode::*;
    let name = next.name.as_str();
    let prev_cols: Vec<(&AgentId, Tokens)> = prev.map(|p| p.collected().collect()).unwrap_or_default();
    let next_cols: Vec<(&AgentId, Tokens)> = next.collected().collect();
    if !next_cols.starts_with(&prev_cols) {
        f.flag(BalanceTransitionInvalid, Some(name), "collection history rewritten");
        return;
    }
    let new_cols = &next_cols[prev_cols.len()..];

    let prev_bounty = prev.and_then(|p| p.bounty());
    match (prev_bounty, next.bounty()) {
        (None, Some((creator, amount))) => {
            let creator = creator.cloned().map_or(Account::Admin, Account::Agent);
            if creator != *committer_account && *committer_account != Account::Admin {
                let what = match &creator {
                    Account::Admin => "only the admin places BOUNTY annotations".to_string(),
                    Account::Agent(a) => format!("sub-bounty funded by {a}"),
                };
                f.flag(BalanceTransitionInvalid, Some(name), what);
                return;
            }
            if let Err(err) = state.place_bounty(&creator, name, amount, now) {
                f.ledger_error(name, err);
                return;
            }
        }
        (Some(a), Some(b)) if a != b => {
            f.flag(BalanceTransitionInvalid, Some(name), "bounty annotation changed");
            return;
        }
        (Some(_), None) => {
            let was_open = state.open_bounties.contains_key(name);
            if *committer_account != Account::Admin || !was_open {
                f.flag(BalanceTransitionInvalid, Some(name), "bounty annotation removed");
                return;
            }
            if let Err(err) = state.remove_bounty(name, now) {
                f.ledger_error(name, err);
                return;
            }
        }
        _ => {}
    }

    let prev_lock = prev.and_then(|p| p.lock());
    let next_lock = next.lock();
    if let Some((holder, expires)) = next_lock.filter(|l| Some(*l) != prev_lock) {
        if holder != committer {
            f.flag(ForeignLockTouched, Some(name), format!("lock placed in the name of {holder}"));
            return;
        }
        if let Some((old_holder, old_expires)) = prev_lock {
            if old_expires >= now && old_holder == committer {
                f.flag(BalanceTransitionInvalid, Some(name), "own live lock modified");
                return;
            }
        }
        if let Err(err) = state.lock_until(committer, name, now, expires) {
            f.ledger_error(name, err);
            return;
        }
    } else if let (Some((holder, expires)), None) = (prev_lock, next_lock) {
        if expires >= now && holder == committer && new_cols.is_empty() {
            f.flag(BalanceTransitionInvalid, Some(name), "live lock released without a collection");
            return;
        }
    }

    if new_cols.len() > 1 {
        f.flag(BalanceTransitionInvalid, Some(name), "more than one new collection");
        return;
    }
    if let Some(&(agent, amount)) = new_cols.first() {
        let class = classes.as_ref().ok().and_then(|c| c.get(name)).copied();
        if class != Some(ProofClass::FullyProved) {
            let why = match (&class, classes) {
                (_, Err(e)) => e.to_string(),
                (Some(c), _) => format!("item is {c}"),
                (None, _) => "item has no proof".to_string(),
            };
            f.agents.insert(agent.clone());
            f.flag(CollectWithoutQed, Some(name), why);
            return;
        }
        if let Err(err) = state.mark_proved(name, now) {
            f.ledger_error(name, err);
            return;
        }
        let beneficiary = state.beneficiary(committer, name, now);
        if *agent != beneficiary {
            f.agents.insert(agent.clone());
            f.agents.insert(beneficiary.clone());
            f.flag(CollectWrongBeneficiary, Some(name), format!("paid to {agent}, due to {beneficiary}"));
            return;
        }
        match state.open_bounties.get(name) {
            Some(b) if b.amount != amount => {
                f.flag(BalanceTransitionInvalid, Some(name), format!("collected {amount}, bounty is {}", b.amount));
                return;
            }
            _ => {}
        }
        if let Err(err) = state.collect(committer, name, now) {
            f.ledger_error(name, err);
        }
    }
}

/// Compare the replayed ledger with the one the proposed file states.
fn compare(
    f: &mut Findings,
    prev: &DevFile,
    next: &DevFile,
    replay: &LedgerState,
    stated: &LedgerState,
    is_admin: bool,
    now: Instant,
) {
    use ViolationCode::BalanceTransitionInvalid as Bti;
    if prev.supply != next.supply && !is_admin {
        f.flag(Bti, None, format!("supply changed from {:?} to {:?}", prev.supply, next.supply));
    }
    let agents: BTreeSet<&AgentId> = replay.balances.keys().chain(stated.balances.keys()).collect();
    let mut mismatches = Vec::new();
    for agent in agents {
        if f.agents.contains(agent) {
            continue;
        }
        let (expected, actual) = (replay.balance(agent), stated.balance(agent));
        if expected != actual {
            let show = |b: Option<Tokens>| b.map_or("nothing".to_string(), |b| b.to_string());
            mismatches.push(format!("{agent} has {}, expected {}", show(actual), show(expected)));
        }
    }
    for m in mismatches {
        f.flag(Bti, None, m);
    }

    let skip = |name: &str, f: &Findings| f.items.contains(name);
    let names: BTreeSet<&String> = replay
        .open_bounties
        .keys()
        .chain(stated.open_bounties.keys())
        .chain(replay.locks.keys())
        .chain(stated.locks.keys())
        .collect();
    let mut flagged = Vec::new();
    for name in names {
        if skip(name, f) {
            continue;
        }
        if replay.open_bounties.get(name) != stated.open_bounties.get(name) {
            flagged.push((name.clone(), "open bounty does not match the replayed ledger"));
            continue;
        }
        // a lapsed lock left in the file is treated as gone
        let lock = |s: &LedgerState| s.locks.get(name).filter(|l| l.is_live(now)).map(|l| (l.holder.clone(), l.expires));
        if lock(replay) != lock(stated) {
            flagged.push((name.clone(), "lock does not match the replayed ledger"));
        }
    }
    let by_item = |s: &LedgerState| {
        let mut m: BTreeMap<String, Vec<(AgentId, Tokens)>> = BTreeMap::new();
        for c in &s.collected {
            m.entry(c.item.clone()).or_default().push((c.agent.clone(), c.amount));
        }
        m
    };
    let (expected, actual) = (by_item(replay), by_item(stated));
    let names: BTreeSet<&String> = expected.keys().chain(actual.keys()).collect();
    for name in names {
        if !skip(name, f) && expected.get(name) != actual.get(name) {
            flagged.push((name.clone(), "collections do not match the replayed ledger"));
        }
    }
    for (name, why) in flagged {
        f.flag(Bti, Some(&name), why);
    }
}
