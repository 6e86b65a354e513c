//! Seeded multi-agent simulation of the marketplace.
//!
//! Every commit period each agent, in a freshly shuffled order, picks a
//! target according to its strategy, may lock it, may split it with a
//! sub-bounty, makes one proof attempt and proposes the resulting file. The
//! proposal goes through [`guard::check_sources`](crate::guard::check_sources)
//! against the current revision; accepted proposals become the new revision
//! and the events the guard inferred are replayed on the ledger.

mod config;

use std::collections::BTreeMap;
use std::fmt::Write;

use chrono::Duration;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::{AgentPolicy, InitialMarket, SimConfig, Strategy};

use crate::depgraph::{build_graph, ProofClass};
use crate::devfile::{render, Annotation, AnnotationKind, DevFile, DevFileError, Item, ItemKind, ProofStatus};
use crate::guard::{check_sources, Violation};
use crate::ledger::{
    format_event_log, lifecycle_report, Account, AgentId, EventKind, LedgerState, MarketEvent, Tokens,
};
use crate::metrics::{agent_history, agent_history_csv, growth_csv, growth_series, Snapshot};
use crate::time::{format_instant, Instant};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("initial development does not parse: {0}")]
    InitialParse(#[from] DevFileError),
    #[error("initial revision rejected: {0}")]
    InitialRevisionRejected(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitRecord {
    pub time: Instant,
    pub agent: AgentId,
    pub line_count: usize,
    pub normalized_line_count: usize,
    pub events: Vec<MarketEvent>,
    /// Live locks per agent right after the commit.
    pub live_locks: BTreeMap<AgentId, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub time: Instant,
    pub agent: AgentId,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug)]
pub struct SimTrace {
    pub initial_ledger: LedgerState,
    /// Every accepted revision; `revisions[0]` is the initial file and
    /// `commits[i]` produced `revisions[i + 1]`.
    pub revisions: Vec<String>,
    pub commits: Vec<CommitRecord>,
    pub rejections: Vec<Rejection>,
    /// Figures after each revision, aligned with `revisions`.
    pub snapshots: Vec<Snapshot>,
    pub final_ledger: LedgerState,
}

impl SimTrace {
    pub fn events(&self) -> Vec<MarketEvent> {
        self.commits.iter().flat_map(|c| c.events.iter().cloned()).collect()
    }

    /// Event log with a `# commit` line before each commit's events.
    pub fn event_log(&self) -> String {
        let mut out = String::new();
        for c in &self.commits {
            out.push_str("# commit\n");
            out.push_str(&format_event_log(&c.events));
        }
        out
    }

    pub fn growth_csv(&self) -> String {
        growth_csv(&growth_series(&self.revisions)).expect("in-memory csv")
    }

    pub fn agent_history_csv(&self) -> String {
        agent_history_csv(&self.snapshots).expect("in-memory csv")
    }

    pub fn rejection_log(&self) -> String {
        let mut out = String::new();
        for r in &self.rejections {
            for v in &r.violations {
                let _ = writeln!(out, "{} {} {v}", format_instant(r.time), r.agent);
            }
        }
        out
    }

    /// Everything the run produced, as one text. Identical runs give
    /// identical bytes.
    pub fn fingerprint(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.event_log());
        out.push_str(&self.growth_csv());
        out.push_str(&self.agent_history_csv());
        out.push_str(&self.rejection_log());
        if let Some(last) = self.revisions.last() {
            out.push_str(last);
        }
        out
    }

    pub fn max_live_locks(&self) -> usize {
        self.commits.iter().flat_map(|c| c.live_locks.values().copied()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, Default)]
struct Work {
    difficulty: u8,
    attempts: u32,
    complete: bool,
}

struct Sim<'c> {
    cfg: &'c SimConfig,
    rng: ChaCha8Rng,
    file: DevFile,
    text: String,
    ledger: LedgerState,
    work: BTreeMap<String, Work>,
    revisions: Vec<String>,
    commits: Vec<CommitRecord>,
    rejections: Vec<Rejection>,
}

/// A generated development: admin-funded theorems with estimates, and a
/// header funding every agent.
pub fn synthetic_market(cfg: &SimConfig, rng: &mut impl Rng, theorems: usize) -> Result<String, SimError> {
    let mut s = String::from("(* Synthetic development. *)\n");
    let _ = writeln!(s, "(* SUPPLY: {} *)", cfg.total_supply);
    for a in &cfg.agents {
        let _ = writeln!(s, "(* BALANCE: {} {} *)", a.name, cfg.initial_balance);
    }
    s.push_str("\nDefinition carrier := universe.\n");
    let mut funded = cfg.initial_balance * cfg.agents.len() as Tokens;
    for k in 0..theorems {
        let lines: u32 = rng.gen_range(5..=60);
        let difficulty: u8 = rng.gen_range(1..=10);
        let usd = u64::from(lines) * u64::from(difficulty) * 5;
        let bounty = (usd as Tokens / 20).max(1);
        funded += bounty;
        let _ = write!(
            s,
            "\n(* ESTIMATE: lines={lines} difficulty={difficulty} usd={usd} *)\n(* BOUNTY: {bounty} *)\n\
             Theorem thm_{k:03} : holds_{k} carrier.\nAdmitted.\n"
        );
    }
    if funded > cfg.total_supply {
        return Err(SimError::ConfigInvalid(format!("market needs {funded} tokens, supply is {}", cfg.total_supply)));
    }
    Ok(s)
}

fn proof_keyword(status: ProofStatus) -> Option<&'static str> {
    match status {
        ProofStatus::Qed => Some("Qed"),
        ProofStatus::Admitted => Some("Admitted"),
        ProofStatus::Open => None,
    }
}

/// Proof source without its terminator, ending in a newline.
fn proof_body_source(item: &Item) -> String {
    let src = item.proof_source.clone().unwrap_or_default();
    let mut body = match proof_keyword(item.proof_status).and_then(|k| src.rfind(k)) {
        Some(at) => src[..at].to_string(),
        None => src,
    };
    if !body.ends_with('\n') {
        body.push('\n');
    }
    body
}

fn append_step(item: &mut Item, step: &str) {
    let mut body = proof_body_source(item);
    let _ = writeln!(body, "  {step}");
    let status = if item.proof_status == ProofStatus::Open { ProofStatus::Admitted } else { item.proof_status };
    body.push_str(proof_keyword(status).expect("status has a keyword"));
    body.push('.');
    item.proof_source = Some(body);
    item.proof_status = status;
}

fn set_status(item: &mut Item, status: ProofStatus) {
    let mut body = proof_body_source(item);
    body.push_str(proof_keyword(status).expect("status has a keyword"));
    body.push('.');
    item.proof_source = Some(body);
    item.proof_status = status;
}

fn is_provable(item: &Item) -> bool {
    matches!(item.kind, ItemKind::Theorem | ItemKind::Lemma) && item.proof_status != ProofStatus::Qed
}

pub fn run(cfg: &SimConfig) -> Result<SimTrace, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let text = match &cfg.initial {
        InitialMarket::Synthetic { theorems } => synthetic_market(cfg, &mut rng, *theorems)?,
        InitialMarket::Source(s) => s.clone(),
    };
    let file = DevFile::from_source(&text)?;
    let verdict = check_sources(&text, &text, cfg.agents[0].name.clone(), cfg.start, cfg.rules.clone(), cfg.allowed_axioms.clone())
        .map_err(|e| SimError::InitialRevisionRejected(e.to_string()))?;
    if !verdict.is_clean() {
        let list: Vec<String> = verdict.violations.iter().map(|v| v.to_string()).collect();
        return Err(SimError::InitialRevisionRejected(list.join("; ")));
    }
    let mut ledger = LedgerState::from_devfile(&file, cfg.rules.clone());
    ledger.clock = cfg.start;
    for a in &cfg.agents {
        if ledger.balance(&a.name).is_none() {
            return Err(SimError::InitialRevisionRejected(format!("no BALANCE entry for {}", a.name)));
        }
    }
    if file.supply.is_some() && ledger.admin_sink < 0 {
        return Err(SimError::InitialRevisionRejected("bounties and balances exceed the supply".into()));
    }
    let work = file
        .items
        .iter()
        .filter(|i| matches!(i.kind, ItemKind::Theorem | ItemKind::Lemma))
        .map(|i| {
            let attempts = i.proof_body().iter().filter(|t| t.is_punct('.')).count() as u32;
            let difficulty = i.estimate.as_ref().map_or(5, |e| e.difficulty);
            (i.name.clone(), Work { difficulty, attempts, complete: false })
        })
        .collect();
    let initial_ledger = ledger.clone();
    let mut sim = Sim {
        cfg,
        rng,
        file,
        text: text.clone(),
        ledger,
        work,
        revisions: vec![text],
        commits: Vec::new(),
        rejections: Vec::new(),
    };
    let period = Duration::minutes(i64::from(cfg.commit_period_minutes));
    let ticks = i64::from(cfg.horizon_hours) * 60 / i64::from(cfg.commit_period_minutes);
    let mut order: Vec<usize> = (0..cfg.agents.len()).collect();
    for tick in 1..=ticks {
        let now = cfg.start + period * tick as i32;
        order.shuffle(&mut sim.rng);
        for &i in &order {
            sim.act(i, now);
        }
    }
    let groups: Vec<&[MarketEvent]> =
        std::iter::once(&[][..]).chain(sim.commits.iter().map(|c| c.events.as_slice())).collect();
    let snapshots = agent_history(&initial_ledger, &groups).expect("accepted events replay");
    Ok(SimTrace {
        initial_ledger,
        revisions: sim.revisions,
        commits: sim.commits,
        rejections: sim.rejections,
        snapshots,
        final_ledger: sim.ledger,
    })
}

/// What an agent decided to do this period.
struct Plan {
    target: String,
    locks: Vec<String>,
}

impl Sim<'_> {
    fn bounty(&self, scratch: &LedgerState, name: &str) -> Tokens {
        scratch.open_bounties.get(name).map_or(0, |b| b.amount)
    }

    fn work_of(&self, name: &str) -> Work {
        self.work.get(name).cloned().unwrap_or(Work { difficulty: 5, attempts: 0, complete: false })
    }

    fn plan(&self, policy: &AgentPolicy, scratch: &LedgerState, now: Instant) -> Option<Plan> {
        let me = &policy.name;
        let balance = scratch.balance(me).unwrap_or(0);
        let rules = &scratch.rules;
        let lock_holder = |name: &str| scratch.live_lock(name, now).map(|l| l.holder.clone());
        let candidates: Vec<&Item> = self.file.items.iter().filter(|i| is_provable(i)).collect();
        let mine: Vec<&Item> = candidates.iter().copied().filter(|i| lock_holder(&i.name).as_ref() == Some(me)).collect();
        let unlocked: Vec<&Item> = candidates.iter().copied().filter(|i| lock_holder(&i.name).is_none()).collect();
        let profitable = |name: &str, budget: Tokens| {
            let b = self.bounty(scratch, name);
            let fee = rules.lock_fee(b);
            b > 0 && fee < b && fee <= budget
        };
        let by_bounty = |items: &[&Item]| -> Option<String> {
            items
                .iter()
                .max_by_key(|i| (self.bounty(scratch, &i.name), std::cmp::Reverse(i.name.clone())))
                .map(|i| i.name.clone())
        };
        let by_rate = |items: &[&Item]| -> Option<String> {
            items
                .iter()
                .filter(|i| self.bounty(scratch, &i.name) > 0)
                .max_by_key(|i| {
                    let d = Tokens::from(self.work_of(&i.name).difficulty.max(1));
                    (self.bounty(scratch, &i.name) * 100 / d, std::cmp::Reverse(i.name.clone()))
                })
                .map(|i| i.name.clone())
        };
        let held = scratch.live_locks(me);
        match policy.strategy {
            Strategy::GreedyLocker => {
                let mut pool: Vec<&Item> = unlocked.iter().copied().filter(|i| self.bounty(scratch, &i.name) > 0).collect();
                pool.sort_by_key(|i| (std::cmp::Reverse(self.bounty(scratch, &i.name)), i.name.clone()));
                let mut budget = balance / 4;
                let mut locks = Vec::new();
                for i in pool {
                    if held + locks.len() >= rules.max_locks || locks.len() >= 2 {
                        break;
                    }
                    if profitable(&i.name, budget) {
                        budget -= rules.lock_fee(self.bounty(scratch, &i.name));
                        locks.push(i.name.clone());
                    }
                }
                let mut owned: Vec<&Item> = mine.clone();
                owned.extend(candidates.iter().copied().filter(|i| locks.contains(&i.name)));
                let target = by_bounty(&owned).or_else(|| by_bounty(&unlocked))?;
                Some(Plan { target, locks })
            }
            Strategy::Competitor => {
                if let Some(target) = by_bounty(&mine) {
                    return Some(Plan { target, locks: Vec::new() });
                }
                let target = by_rate(&unlocked).or_else(|| by_bounty(&unlocked))?;
                let locks = if held < rules.max_locks && profitable(&target, balance / 2) { vec![target.clone()] } else { Vec::new() };
                Some(Plan { target, locks })
            }
            Strategy::Collaborator => {
                let others_sub: Vec<&Item> = unlocked
                    .iter()
                    .copied()
                    .filter(|i| matches!(scratch.open_bounties.get(&i.name), Some(b) if b.creator != Account::Agent(me.clone()) && b.creator != Account::Admin))
                    .collect();
                let blocking: Vec<&Item> = unlocked
                    .iter()
                    .copied()
                    .filter(|i| {
                        self.file.items.iter().any(|p| {
                            self.work_of(&p.name).complete && p.proof_tokens.iter().any(|t| t.text == i.name)
                        })
                    })
                    .collect();
                let easiest = |items: &[&Item]| {
                    items
                        .iter()
                        .min_by_key(|i| (self.work_of(&i.name).difficulty, std::cmp::Reverse(self.bounty(scratch, &i.name)), i.name.clone()))
                        .map(|i| i.name.clone())
                };
                let target = easiest(&blocking)
                    .or_else(|| easiest(&others_sub))
                    .or_else(|| easiest(&unlocked.iter().copied().filter(|i| self.bounty(scratch, &i.name) > 0).collect::<Vec<_>>()))
                    .or_else(|| easiest(&unlocked))?;
                Some(Plan { target, locks: Vec::new() })
            }
            Strategy::Sniper => {
                let target = unlocked
                    .iter()
                    .filter(|i| self.bounty(scratch, &i.name) > 0 && self.work_of(&i.name).attempts > 0)
                    .max_by_key(|i| (self.work_of(&i.name).attempts, self.bounty(scratch, &i.name), std::cmp::Reverse(i.name.clone())))
                    .map(|i| i.name.clone())
                    .or_else(|| by_rate(&unlocked))
                    .or_else(|| by_bounty(&unlocked))?;
                Some(Plan { target, locks: Vec::new() })
            }
        }
    }

    fn act(&mut self, agent_idx: usize, now: Instant) {
        let policy = self.cfg.agents[agent_idx].clone();
        let me = policy.name.clone();
        // random draws happen in a fixed order whatever the plan is
        let split_roll = self.rng.gen_bool(policy.sub_bounty_propensity);
        let attempt_roll: f64 = self.rng.gen();
        let mistake_roll = self.rng.gen_bool(self.cfg.mistake_rate);

        let (mut next, mut scratch) = self.fresh(now);
        let Some(Plan { target, locks }) = self.plan(&policy, &scratch, now) else {
            return;
        };
        // new locks go in their own revision so the fee is visible
        let mut locked = false;
        for name in &locks {
            if scratch.lock(&me, name, now).is_ok() {
                let expires = scratch.locks[name].expires;
                if let Some(item) = next.item_mut(name) {
                    item.annotations.push(Annotation::new(AnnotationKind::Lock { agent: me.clone(), expires }));
                }
                locked = true;
            }
        }
        if locked {
            scratch.write_header(&mut next);
            let work = self.work.clone();
            if !self.propose(next, work, &me, now) {
                return;
            }
            (next, scratch) = self.fresh(now);
        }

        let mut work = self.work.clone();
        let mut changed = false;
        if split_roll {
            changed |= self.split(&mut next, &mut scratch, &mut work, &me, &target, now);
        }
        changed |= self.attempt(&mut next, &mut scratch, &mut work, &policy, &target, attempt_roll, now);
        let claim = if mistake_roll { self.claim_unfinished(&mut next, &scratch, &me, &target) } else { None };
        if !changed && claim.is_none() {
            return;
        }
        scratch.write_header(&mut next);
        if let Some(amount) = claim {
            if let Some(b) = next.balances.iter_mut().find(|(a, _)| *a == me) {
                b.1 += amount;
            }
        }
        self.propose(next, work, &me, now);
    }

    /// The current revision with lapsed locks dropped, and the matching ledger.
    fn fresh(&self, now: Instant) -> (DevFile, LedgerState) {
        let mut next = self.file.clone();
        let mut scratch = self.ledger.clone();
        scratch.expire_locks(now).expect("simulation clock never runs backwards");
        for item in &mut next.items {
            item.annotations.retain(|a| !matches!(&a.kind, AnnotationKind::Lock { expires, .. } if *expires < now));
        }
        (next, scratch)
    }

    /// Add a funded sub-lemma in front of `target` and use it in the proof.
    fn split(
        &mut self,
        next: &mut DevFile,
        scratch: &mut LedgerState,
        work: &mut BTreeMap<String, Work>,
        me: &AgentId,
        target: &str,
        now: Instant,
    ) -> bool {
        let parent = work.get(target).cloned().unwrap_or_default();
        if parent.complete || parent.difficulty < 2 {
            return false;
        }
        let existing = next.items.iter().filter(|i| i.name.starts_with(&format!("{target}_sub"))).count();
        if existing >= 3 {
            return false;
        }
        let name = format!("{target}_sub{existing}");
        if next.item(&name).is_some() {
            return false;
        }
        let amount = (self.bounty(scratch, target) / 4).max(5);
        if scratch.place_bounty(&Account::Agent(me.clone()), &name, amount, now).is_err() {
            return false;
        }
        let difficulty = (parent.difficulty / 2).max(1);
        let lines = 5 * u32::from(difficulty);
        let usd = u64::from(lines) * u64::from(difficulty) * 5;
        let snippet = format!(
            "(* ESTIMATE: lines={lines} difficulty={difficulty} usd={usd} *)\n(* SUBBOUNTY: {me} {amount} *)\n\
             Lemma {name} : step_of_{target}.\nAdmitted."
        );
        let mut item = match DevFile::from_source(&snippet) {
            Ok(mut f) => f.items.remove(0),
            Err(_) => return false,
        };
        let at = next.items.iter().position(|i| i.name == target).expect("target exists");
        item.preceding = "\n".into();
        if next.items[at].preceding.is_empty() {
            next.items[at].preceding = "\n".into();
        } else {
            item.preceding = std::mem::take(&mut next.items[at].preceding);
            next.items[at].preceding = "\n\n".into();
        }
        next.items.insert(at, item);
        append_step(next.items.get_mut(at + 1).expect("target follows"), &format!("apply {name}."));
        work.insert(name, Work { difficulty, attempts: 0, complete: false });
        true
    }

    /// One proof attempt; finishing it collects when the closure allows.
    #[allow(clippy::too_many_arguments)]
    fn attempt(
        &mut self,
        next: &mut DevFile,
        scratch: &mut LedgerState,
        work: &mut BTreeMap<String, Work>,
        policy: &AgentPolicy,
        target: &str,
        roll: f64,
        now: Instant,
    ) -> bool {
        let me = &policy.name;
        let w = work.entry(target.to_string()).or_insert(Work { difficulty: 5, attempts: 0, complete: false });
        let Some(item) = next.item_mut(target) else { return false };
        let mut changed = false;
        if !w.complete {
            let base = policy.skill / (f64::from(w.difficulty.max(1)) * self.cfg.attempts_scale);
            let p = (base * (1.0 + f64::from(w.attempts))).clamp(0.0, 1.0);
            w.attempts += 1;
            if roll >= p {
                append_step(item, &format!("apply progress_{}_{}.", me.as_str().to_lowercase(), w.attempts));
                return true;
            }
            w.complete = true;
            append_step(item, &format!("exact (finish_{target})."));
            changed = true;
        }
        set_status(item, ProofStatus::Qed);
        let probe = render(next);
        let class = DevFile::from_source(&probe)
            .ok()
            .and_then(|f| build_graph(&f, &self.cfg.allowed_axioms).classify().ok())
            .and_then(|c| c.get(target).copied());
        let item = next.item_mut(target).expect("target exists");
        if class != Some(ProofClass::FullyProved) {
            set_status(item, ProofStatus::Admitted);
            return changed;
        }
        if scratch.open_bounties.contains_key(target) {
            let amount = self.bounty(scratch, target);
            let paid = scratch.mark_proved(target, now).and_then(|_| scratch.collect(me, target, now));
            if let Ok(beneficiary) = paid {
                item.annotations.retain(|a| !matches!(a.kind, AnnotationKind::Lock { .. }));
                item.annotations.push(Annotation::new(AnnotationKind::Collected { agent: beneficiary, amount }));
            }
        }
        true
    }

    /// The mistake: claim the target's bounty although it is not proved.
    fn claim_unfinished(&self, next: &mut DevFile, scratch: &LedgerState, me: &AgentId, target: &str) -> Option<Tokens> {
        let amount = self.bounty(scratch, target);
        let item = next.item_mut(target)?;
        if amount == 0 || item.proof_status == ProofStatus::Qed {
            return None;
        }
        item.annotations.push(Annotation::new(AnnotationKind::Collected { agent: me.clone(), amount }));
        Some(amount)
    }

    fn propose(&mut self, next: DevFile, work: BTreeMap<String, Work>, me: &AgentId, now: Instant) -> bool {
        let text = render(&next);
        let verdict = match check_sources(&self.text, &text, me.clone(), now, self.cfg.rules.clone(), self.cfg.allowed_axioms.clone()) {
            Ok(v) => v,
            Err(e) => {
                self.rejections.push(Rejection {
                    time: now,
                    agent: me.clone(),
                    violations: vec![Violation {
                        code: crate::guard::ViolationCode::BalanceTransitionInvalid,
                        item: None,
                        detail: e.to_string(),
                    }],
                });
                return false;
            }
        };
        if !verdict.is_clean() {
            self.rejections.push(Rejection { time: now, agent: me.clone(), violations: verdict.violations });
            return false;
        }
        let mut ledger = self.ledger.clone();
        if let Err((i, e)) = ledger.replay(&verdict.events) {
            self.rejections.push(Rejection {
                time: now,
                agent: me.clone(),
                violations: vec![Violation {
                    code: crate::guard::ViolationCode::BalanceTransitionInvalid,
                    item: verdict.events[i].item.clone(),
                    detail: format!("implied event does not replay: {e}"),
                }],
            });
            return false;
        }
        let file = DevFile::from_source(&text).expect("rendered revision parses");
        let live_locks = self
            .cfg
            .agents
            .iter()
            .map(|a| (a.name.clone(), ledger.locks.values().filter(|l| l.holder == a.name && l.is_live(now)).count()))
            .collect();
        self.commits.push(CommitRecord {
            time: now,
            agent: me.clone(),
            line_count: file.raw_line_count,
            normalized_line_count: file.normalized_line_count,
            events: verdict.events,
            live_locks,
        });
        self.file = file;
        self.ledger = ledger;
        self.work = work;
        self.revisions.push(text.clone());
        self.text = text;
        true
    }
}

/// Aggregates of one simulation run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub label: String,
    pub seed: u64,
    pub commits: usize,
    pub rejected: usize,
    pub total_collected: Tokens,
    /// Sub-bounty tokens collected by the agent that placed them.
    pub self_collected: Tokens,
    /// Sub-bounty tokens collected by someone else.
    pub cross_collected: Tokens,
    pub locks_placed: usize,
    pub max_live_locks: usize,
}

pub fn summarize(label: &str, cfg: &SimConfig, trace: &SimTrace) -> SweepRow {
    let events = trace.events();
    let life = lifecycle_report(&events);
    SweepRow {
        label: label.to_string(),
        seed: cfg.seed,
        commits: trace.commits.len(),
        rejected: trace.rejections.len(),
        total_collected: events.iter().filter(|e| e.kind == EventKind::Collect).map(|e| e.amount).sum(),
        self_collected: life.self_collected,
        cross_collected: life.cross_collected,
        locks_placed: events.iter().filter(|e| e.kind == EventKind::Lock).count(),
        max_live_locks: trace.max_live_locks(),
    }
}

/// Run every configuration, in parallel, and summarize each run.
pub fn sweep(configs: &[(String, SimConfig)]) -> Result<Vec<SweepRow>, SimError> {
    if configs.is_empty() {
        return Err(SimError::ConfigInvalid("empty sweep".into()));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(label, cfg)| scope.spawn(move || run(cfg).map(|t| summarize(label, cfg, &t))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "label",
        "seed",
        "commits",
        "rejected",
        "total_collected",
        "self_collected",
        "cross_collected",
        "locks_placed",
        "max_live_locks",
    ])
    .expect("in-memory csv");
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.seed.to_string(),
            r.commits.to_string(),
            r.rejected.to_string(),
            r.total_collected.to_string(),
            r.self_collected.to_string(),
            r.cross_collected.to_string(),
            r.locks_placed.to_string(),
            r.max_live_locks.to_string(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}
