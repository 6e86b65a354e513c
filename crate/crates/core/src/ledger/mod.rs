//! The marketplace economy: balances, bounty escrow, locks and collections.
//!
//! All amounts are integer tokens. Every token is accounted for by exactly
//! one of: an agent balance, an open bounty, or the admin sink (unallocated
//! supply plus forfeited lock fees), so
//! `sum(balances) + sum(open bounties) + admin_sink == total_supply`
//! holds after every successful operation. Operations are transactional:
//! on error the state is left untouched.

mod event;
mod lifecycle;
mod sync;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::Duration;
use thiserror::Error;

pub use event::{format_event_log, parse_event_log, EventKind, EventLog, MarketEvent};
pub use lifecycle::{lifecycle_report, LifecycleReport};
pub use sync::apply_to_devfile;

use crate::devfile::{AnnotationKind, DevFile, ProofStatus};
use crate::time::{epoch, Instant};

pub type Tokens = i64;

/// Reserved account name for the administrator.
pub const ADMIN: &str = "admin";

pub const DEFAULT_TOTAL_SUPPLY: Tokens = 45_000;
pub const DEFAULT_INITIAL_BALANCE: Tokens = 500;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: &str) -> Result<Self, LedgerError> {
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c.is_control()) || name == "-" {
            return Err(LedgerError::InvalidAgentName(name.to_string()));
        }
        Ok(AgentId(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_admin(&self) -> bool {
        self.0 == ADMIN
    }
}

impl std::str::FromStr for AgentId {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentId::new(s)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Who funds (or receives) a transfer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Account {
    Admin,
    Agent(AgentId),
}

impl Account {
    pub fn parse(name: &str) -> Result<Self, LedgerError> {
        if name == ADMIN {
            Ok(Account::Admin)
        } else {
            AgentId::new(name).map(Account::Agent)
        }
    }

    pub fn agent(&self) -> Option<&AgentId> {
        match self {
            Account::Admin => None,
            Account::Agent(a) => Some(a),
        }
    }
}

impl From<AgentId> for Account {
    fn from(a: AgentId) -> Self {
        if a.is_admin() {
            Account::Admin
        } else {
            Account::Agent(a)
        }
    }
}

impl fmt::Display for Account {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Account::Admin => f.write_str(ADMIN),
            Account::Agent(a) => a.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("{account} needs {needed} tokens but holds {available}")]
    InsufficientBalance { account: Account, needed: Tokens, available: Tokens },
    #[error("amount must be positive, got {0}")]
    NonPositiveAmount(Tokens),
    #[error("`{0}` is already proved")]
    AlreadyProved(String),
    #[error("`{0}` already carries an open bounty")]
    DuplicateBounty(String),
    #[error("{0} already holds the maximum number of live locks")]
    LockLimitExceeded(AgentId),
    #[error("`{item}` is locked by {holder}")]
    AlreadyLocked { item: String, holder: AgentId },
    #[error("`{0}` has no open bounty")]
    NoBounty(String),
    #[error("`{0}` is not proved")]
    NotProved(String),
    #[error("adjustment would leave {0} with a negative balance")]
    WouldGoNegative(AgentId),
    #[error("lock expiry {expires} is outside [{now}, {now} + lock duration]")]
    InvalidLockExpiry { now: Instant, expires: Instant },
    #[error("time went backwards: {now} < {clock}")]
    ClockRegression { clock: Instant, now: Instant },
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("invalid agent name `{0}`")]
    InvalidAgentName(String),
    #[error("{0} events must be issued by the admin")]
    AdminOnly(EventKind),
    #[error("initial balances exceed the total supply")]
    SupplyExceeded,
    #[error("event log line {line}: {reason}")]
    BadEvent { line: usize, reason: String },
}

/// Tunable market rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rules {
    /// Lock fee as a percentage of the bounty, rounded up.
    pub lock_fee_percent: u32,
    /// Live locks one agent may hold at once.
    pub max_locks: usize,
    pub lock_duration: Duration,
    /// Return the lock fee to the locker when the bounty is collected.
    pub refund_fee_on_collect: bool,
}

impl Default for Rules {
    fn default() -> Self {
        Rules {
            lock_fee_percent: 10,
            max_locks: 10,
            lock_duration: Duration::hours(24),
            refund_fee_on_collect: false,
        }
    }
}

impl Rules {
    /// `ceil(bounty * pct / 100)`; zero for non-positive bounties.
    pub fn lock_fee(&self, bounty: Tokens) -> Tokens {
        if bounty <= 0 {
            return 0;
        }
        let pct = Tokens::from(self.lock_fee_percent);
        (bounty * pct + 99) / 100
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounty {
    pub amount: Tokens,
    pub creator: Account,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LockRecord {
    pub holder: AgentId,
    pub placed: Instant,
    pub expires: Instant,
    pub fee_paid: Tokens,
}

impl LockRecord {
    /// A lock stays live up to and including its expiry instant.
    pub fn is_live(&self, now: Instant) -> bool {
        self.expires >= now
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collection {
    pub item: String,
    /// Who received the bounty.
    pub agent: AgentId,
    pub amount: Tokens,
    pub time: Instant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerState {
    pub rules: Rules,
    pub balances: BTreeMap<AgentId, Tokens>,
    pub open_bounties: BTreeMap<String, Bounty>,
    pub locks: BTreeMap<String, LockRecord>,
    pub collected: Vec<Collection>,
    /// Items known to be proved; collection requires membership.
    pub proved: BTreeSet<String>,
    pub admin_sink: Tokens,
    pub total_supply: Tokens,
    pub clock: Instant,
    pub log: Vec<MarketEvent>,
}

impl LedgerState {
    /// Fresh economy: `agents` receive their balances out of `total_supply`,
    /// the remainder is held by the admin sink.
    pub fn new(
        total_supply: Tokens,
        agents: impl IntoIterator<Item = (AgentId, Tokens)>,
        rules: Rules,
        start: Instant,
    ) -> Result<Self, LedgerError> {
        let balances: BTreeMap<AgentId, Tokens> = agents.into_iter().collect();
        let allocated: Tokens = balances.values().sum();
        if balances.values().any(|&b| b < 0) || allocated > total_supply {
            return Err(LedgerError::SupplyExceeded);
        }
        Ok(LedgerState {
            rules,
            balances,
            open_bounties: BTreeMap::new(),
            locks: BTreeMap::new(),
            collected: Vec::new(),
            proved: BTreeSet::new(),
            admin_sink: total_supply - allocated,
            total_supply,
            clock: start,
            log: Vec::new(),
        })
    }

    /// Default economy: 45k total, 500 per named agent.
    pub fn with_agents(names: &[&str], start: Instant) -> Result<Self, LedgerError> {
        let agents = names
            .iter()
            .map(|n| AgentId::new(n).map(|a| (a, DEFAULT_INITIAL_BALANCE)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(DEFAULT_TOTAL_SUPPLY, agents, Rules::default(), start)
    }

    /// Read the ledger recorded in a development's annotations.
    ///
    /// Values are taken as written (negative balances included) so that a
    /// guard can judge them; lock placement is reconstructed as
    /// `expires - lock_duration` and fees from the rules. Without a `SUPPLY`
    /// header the supply is whatever the file accounts for.
    pub fn from_devfile(file: &DevFile, rules: Rules) -> Self {
        let balances: BTreeMap<AgentId, Tokens> = file.balances.iter().cloned().collect();
        let mut open_bounties = BTreeMap::new();
        let mut locks = BTreeMap::new();
        let mut collected = Vec::new();
        let mut proved = BTreeSet::new();
        for item in &file.items {
            if item.proof_status == ProofStatus::Qed {
                proved.insert(item.name.clone());
            }
            let mut was_collected = false;
            for (agent, amount) in item.collected() {
                was_collected = true;
                collected.push(Collection {
                    item: item.name.clone(),
                    agent: agent.clone(),
                    amount,
                    time: epoch(),
                });
            }
            let bounty = item.bounty();
            if let (Some((creator, amount)), false) = (bounty, was_collected) {
                let creator = creator.cloned().map_or(Account::Admin, Account::Agent);
                open_bounties.insert(item.name.clone(), Bounty { amount, creator });
            }
            for a in &item.annotations {
                if let AnnotationKind::Lock { agent, expires } = &a.kind {
                    locks.entry(item.name.clone()).or_insert_with(|| LockRecord {
                        holder: agent.clone(),
                        placed: *expires - rules.lock_duration,
                        expires: *expires,
                        fee_paid: rules.lock_fee(bounty.map_or(0, |(_, amt)| amt)),
                    });
                }
            }
        }
        let accounted: Tokens = balances.values().sum::<Tokens>()
            + open_bounties.values().map(|b: &Bounty| b.amount).sum::<Tokens>();
        let total_supply = file.supply.unwrap_or(accounted);
        LedgerState {
            rules,
            balances,
            open_bounties,
            locks,
            collected,
            proved,
            admin_sink: total_supply - accounted,
            total_supply,
            clock: epoch(),
            log: Vec::new(),
        }
    }

    /// Write balances and supply into a development's header block.
    pub fn write_header(&self, file: &mut DevFile) {
        file.supply = Some(self.total_supply);
        file.balances = self.balances.iter().map(|(a, b)| (a.clone(), *b)).collect();
    }

    pub fn balance(&self, agent: &AgentId) -> Option<Tokens> {
        self.balances.get(agent).copied()
    }

    pub fn escrow(&self) -> Tokens {
        self.open_bounties.values().map(|b| b.amount).sum()
    }

    /// `total_supply - (balances + escrow + sink)`; zero when conserved.
    pub fn conservation_gap(&self) -> Tokens {
        self.total_supply - (self.balances.values().sum::<Tokens>() + self.escrow() + self.admin_sink)
    }

    pub fn is_conserved(&self) -> bool {
        self.conservation_gap() == 0
    }

    /// Live locks held by `agent` at the ledger clock.
    pub fn live_locks(&self, agent: &AgentId) -> usize {
        self.locks
            .values()
            .filter(|l| &l.holder == agent && l.is_live(self.clock))
            .count()
    }

    pub fn live_lock(&self, item: &str, now: Instant) -> Option<&LockRecord> {
        self.locks.get(item).filter(|l| l.is_live(now))
    }

    fn tick(&self, now: Instant) -> Result<(), LedgerError> {
        if now < self.clock {
            return Err(LedgerError::ClockRegression { clock: self.clock, now });
        }
        Ok(())
    }

    fn funds(&self, account: &Account) -> Result<Tokens, LedgerError> {
        match account {
            Account::Admin => Ok(self.admin_sink),
            Account::Agent(a) => self.balance(a).ok_or_else(|| LedgerError::UnknownAgent(a.clone())),
        }
    }

    fn credit(&mut self, account: &Account, delta: Tokens) {
        match account {
            Account::Admin => self.admin_sink += delta,
            Account::Agent(a) => *self.balances.entry(a.clone()).or_insert(0) += delta,
        }
    }

    fn record(&mut self, now: Instant, kind: EventKind, agent: Account, item: Option<&str>, amount: Tokens) {
        self.clock = now;
        self.log.push(MarketEvent {
            time: now,
            kind,
            agent,
            item: item.map(str::to_string),
            amount,
            expires: None,
            reason: None,
        });
    }

    /// Escrow `amount` from `creator` as a bounty on `item`.
    pub fn place_bounty(&mut self, creator: &Account, item: &str, amount: Tokens, now: Instant) -> Result<(), LedgerError> {
        self.tick(now)?;
        if amount <= 0 {
            return Err(LedgerError::NonPositiveAmount(amount));
        }
        if self.proved.contains(item) {
            return Err(LedgerError::AlreadyProved(item.to_string()));
        }
        if self.open_bounties.contains_key(item) {
            return Err(LedgerError::DuplicateBounty(item.to_string()));
        }
        let available = self.funds(creator)?;
        if available < amount {
            return Err(LedgerError::InsufficientBalance { account: creator.clone(), needed: amount, available });
        }
        self.credit(creator, -amount);
        self.open_bounties.insert(item.to_string(), Bounty { amount, creator: creator.clone() });
        let kind = match creator {
            Account::Admin => EventKind::PlaceBounty,
            Account::Agent(_) => EventKind::PlaceSubBounty,
        };
        self.record(now, kind, creator.clone(), Some(item), amount);
        Ok(())
    }

    /// Lock `item` for the full lock duration starting at `now`.
    pub fn lock(&mut self, agent: &AgentId, item: &str, now: Instant) -> Result<Tokens, LedgerError> {
        self.lock_until(agent, item, now, now + self.rules.lock_duration)
    }

    /// Lock `item` until `expires`, which must lie in `[now, now + lock_duration]`.
    /// Returns the fee paid. A stale lock on the item is replaced.
    pub fn lock_until(&mut self, agent: &AgentId, item: &str, now: Instant, expires: Instant) -> Result<Tokens, LedgerError> {
        self.tick(now)?;
        let bounty = self.open_bounties.get(item).ok_or_else(|| LedgerError::NoBounty(item.to_string()))?;
        if let Some(existing) = self.live_lock(item, now) {
            return Err(LedgerError::AlreadyLocked { item: item.to_string(), holder: existing.holder.clone() });
        }
        if expires < now || expires > now + self.rules.lock_duration {
            return Err(LedgerError::InvalidLockExpiry { now, expires });
        }
        let held = self.locks.values().filter(|l| &l.holder == agent && l.is_live(now)).count();
        if held >= self.rules.max_locks {
            return Err(LedgerError::LockLimitExceeded(agent.clone()));
        }
        let fee = self.rules.lock_fee(bounty.amount);
        let account = Account::Agent(agent.clone());
        let available = self.funds(&account)?;
        if available < fee {
            return Err(LedgerError::InsufficientBalance { account, needed: fee, available });
        }
        if let Some(stale) = self.locks.remove(item) {
            self.record(now, EventKind::RemoveExpiredLock, Account::Agent(stale.holder), Some(item), 0);
        }
        self.credit(&account, -fee);
        self.admin_sink += fee;
        self.locks.insert(
            item.to_string(),
            LockRecord { holder: agent.clone(), placed: now, expires, fee_paid: fee },
        );
        self.record(now, EventKind::Lock, account, Some(item), fee);
        if let Some(ev) = self.log.last_mut() {
            ev.expires = Some(expires);
        }
        Ok(fee)
    }

    /// Drop every lock with `expires < now`. Fees are not refunded.
    pub fn expire_locks(&mut self, now: Instant) -> Result<Vec<(String, LockRecord)>, LedgerError> {
        self.tick(now)?;
        let stale: Vec<String> = self
            .locks
            .iter()
            .filter(|(_, l)| !l.is_live(now))
            .map(|(k, _)| k.clone())
            .collect();
        let mut removed = Vec::with_capacity(stale.len());
        for item in stale {
            let lock = self.locks.remove(&item).expect("key collected above");
            self.record(now, EventKind::RemoveExpiredLock, Account::Agent(lock.holder.clone()), Some(&item), 0);
            removed.push((item, lock));
        }
        self.clock = now;
        Ok(removed)
    }

    /// Record that `item` now has a complete proof.
    pub fn mark_proved(&mut self, item: &str, now: Instant) -> Result<(), LedgerError> {
        self.tick(now)?;
        if self.proved.insert(item.to_string()) {
            self.record(now, EventKind::MarkProved, Account::Admin, Some(item), 0);
        }
        Ok(())
    }

    /// Who would be paid if `prover` collected `item` at `now`.
    pub fn beneficiary(&self, prover: &AgentId, item: &str, now: Instant) -> AgentId {
        self.live_lock(item, now).map_or_else(|| prover.clone(), |l| l.holder.clone())
    }

    /// Pay out the bounty on a proved item. A live lock holder is paid even
    /// when someone else proved it. Returns the beneficiary.
    pub fn collect(&mut self, prover: &AgentId, item: &str, now: Instant) -> Result<AgentId, LedgerError> {
        self.tick(now)?;
        if !self.open_bounties.contains_key(item) {
            return Err(LedgerError::NoBounty(item.to_string()));
        }
        if !self.proved.contains(item) {
            return Err(LedgerError::NotProved(item.to_string()));
        }
        let beneficiary = self.beneficiary(prover, item, now);
        let bounty = self.open_bounties.remove(item).expect("checked above");
        if let Some(lock) = self.locks.remove(item) {
            if self.rules.refund_fee_on_collect && lock.holder == beneficiary {
                self.admin_sink -= lock.fee_paid;
                self.credit(&Account::Agent(lock.holder.clone()), lock.fee_paid);
            }
        }
        self.credit(&Account::Agent(beneficiary.clone()), bounty.amount);
        self.collected.push(Collection {
            item: item.to_string(),
            agent: beneficiary.clone(),
            amount: bounty.amount,
            time: now,
        });
        self.record(now, EventKind::Collect, Account::Agent(prover.clone()), Some(item), bounty.amount);
        Ok(beneficiary)
    }

    /// Move `delta` tokens between the admin sink and `agent`. Unknown agents
    /// are opened with a zero balance first.
    pub fn admin_adjust(&mut self, agent: &AgentId, delta: Tokens, reason: &str, now: Instant) -> Result<(), LedgerError> {
        self.tick(now)?;
        let current = self.balance(agent).unwrap_or(0);
        if current + delta < 0 {
            return Err(LedgerError::WouldGoNegative(agent.clone()));
        }
        if self.admin_sink < delta {
            return Err(LedgerError::InsufficientBalance {
                account: Account::Admin,
                needed: delta,
                available: self.admin_sink,
            });
        }
        self.admin_sink -= delta;
        self.balances.insert(agent.clone(), current + delta);
        self.record(now, EventKind::AdminAdjust, Account::Agent(agent.clone()), None, delta);
        if let Some(ev) = self.log.last_mut() {
            ev.reason = Some(reason.to_string());
        }
        Ok(())
    }

    /// Withdraw an open bounty without a collection, refunding its creator.
    pub fn remove_bounty(&mut self, item: &str, now: Instant) -> Result<(), LedgerError> {
        self.tick(now)?;
        let bounty = self.open_bounties.remove(item).ok_or_else(|| LedgerError::NoBounty(item.to_string()))?;
        self.locks.remove(item);
        self.credit(&bounty.creator, bounty.amount);
        self.record(now, EventKind::RemoveBounty, bounty.creator, Some(item), bounty.amount);
        Ok(())
    }

    /// Apply one logged event through the checked operations.
    pub fn apply(&mut self, event: &MarketEvent) -> Result<(), LedgerError> {
        let now = event.time;
        let item = event.item.as_deref().unwrap_or("-");
        let agent = || {
            event.agent.agent().cloned().ok_or(LedgerError::InvalidAgentName(ADMIN.to_string()))
        };
        match event.kind {
            EventKind::PlaceBounty => {
                if event.agent != Account::Admin {
                    return Err(LedgerError::AdminOnly(event.kind));
                }
                self.place_bounty(&Account::Admin, item, event.amount, now)
            }
            EventKind::PlaceSubBounty => self.place_bounty(&Account::Agent(agent()?), item, event.amount, now),
            EventKind::Lock => {
                let agent = agent()?;
                let expires = event.expires.unwrap_or(now + self.rules.lock_duration);
                self.lock_until(&agent, item, now, expires).map(|_| ())
            }
            EventKind::RemoveExpiredLock => {
                let stale = self.locks.get(item).is_some_and(|l| !l.is_live(now));
                if stale {
                    let lock = self.locks.remove(item).expect("checked");
                    self.record(now, EventKind::RemoveExpiredLock, Account::Agent(lock.holder), Some(item), 0);
                } else {
                    self.tick(now)?;
                    self.clock = now;
                }
                Ok(())
            }
            EventKind::Collect => self.collect(&agent()?, item, now).map(|_| ()),
            EventKind::AdminAdjust => {
                self.admin_adjust(&agent()?, event.amount, event.reason.as_deref().unwrap_or(""), now)
            }
            EventKind::RemoveBounty => self.remove_bounty(item, now),
            EventKind::MarkProved => self.mark_proved(item, now),
        }
    }

    /// Apply events in order, stopping at the first failure.
    pub fn replay<'a>(&mut self, events: impl IntoIterator<Item = &'a MarketEvent>) -> Result<(), (usize, LedgerError)> {
        for (i, e) in events.into_iter().enumerate() {
            self.apply(e).map_err(|err| (i, err))?;
        }
        Ok(())
    }
}
