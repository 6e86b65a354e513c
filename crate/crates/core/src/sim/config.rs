use std::fmt;
use std::str::FromStr;

use chrono::Duration;

use super::SimError;
use crate::depgraph::AxiomIndex;
use crate::ledger::{AgentId, Rules, Tokens, DEFAULT_INITIAL_BALANCE, DEFAULT_TOTAL_SUPPLY};
use crate::time::{parse_instant, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Locks as many well-paid items as it can afford, then works on them.
    GreedyLocker,
    /// Never locks; prefers lemmas that unblock others and sub-bounties
    /// placed by other agents.
    Collaborator,
    /// Holds one lock at a time on the best-paying item per difficulty.
    Competitor,
    /// Never locks; finishes whichever unlocked item is furthest along.
    Sniper,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::GreedyLocker, Strategy::Collaborator, Strategy::Competitor, Strategy::Sniper];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentPolicy {
    pub name: AgentId,
    pub strategy: Strategy,
    /// Multiplier on the per-attempt success probability, in (0, 2].
    pub skill: f64,
    /// Chance per action of splitting the target with a sub-bounty.
    pub sub_bounty_propensity: f64,
}

impl AgentPolicy {
    pub fn new(name: &str, strategy: Strategy, skill: f64, sub_bounty_propensity: f64) -> Self {
        AgentPolicy { name: AgentId::new(name).expect("valid agent name"), strategy, skill, sub_bounty_propensity }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialMarket {
    /// A generated development of this many admin-funded theorems.
    Synthetic { theorems: usize },
    /// Source text of a development whose header funds every agent.
    Source(String),
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub seed: u64,
    pub agents: Vec<AgentPolicy>,
    pub horizon_hours: u32,
    pub commit_period_minutes: u32,
    /// Per-attempt success is `skill / (difficulty * attempts_scale)`,
    /// multiplied by one plus the attempts already made on the item.
    pub attempts_scale: f64,
    pub start: Instant,
    pub rules: Rules,
    pub initial: InitialMarket,
    pub initial_balance: Tokens,
    pub total_supply: Tokens,
    /// Chance per action that an agent also claims the bounty of an item it
    /// has not finished. Such revisions are rejected by the guard.
    pub mistake_rate: f64,
    pub allowed_axioms: AxiomIndex,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            agents: vec![
                AgentPolicy::new("Alice", Strategy::GreedyLocker, 1.0, 0.2),
                AgentPolicy::new("Bob", Strategy::Collaborator, 1.0, 0.5),
                AgentPolicy::new("Charlie", Strategy::Competitor, 1.0, 0.3),
                AgentPolicy::new("Dave", Strategy::Sniper, 1.0, 0.1),
            ],
            horizon_hours: 48,
            commit_period_minutes: 60,
            attempts_scale: 2.0,
            start: parse_instant("2026-02-14T00:00:00Z").expect("constant instant"),
            rules: Rules::default(),
            initial: InitialMarket::Synthetic { theorems: 40 },
            initial_balance: DEFAULT_INITIAL_BALANCE,
            total_supply: DEFAULT_TOTAL_SUPPLY,
            mistake_rate: 0.0,
            allowed_axioms: AxiomIndex::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::ConfigInvalid(msg.into())
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, SimError> {
    value.parse().map_err(|_| invalid(format!("`{key}`: cannot read `{value}`")))
}

impl SimConfig {
    /// Read a `key = value` file. Returns the config and the path named by
    /// `initial_file`, which the caller loads into [`InitialMarket::Source`].
    pub fn parse(text: &str) -> Result<(SimConfig, Option<String>), SimError> {
        let mut cfg = SimConfig::default();
        let mut initial_file = None;
        let mut agents = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| invalid(format!("line {}: expected `key = value`", n + 1)))?;
            match key {
                "seed" => cfg.seed = num(key, value)?,
                "horizon_hours" => cfg.horizon_hours = num(key, value)?,
                "commit_period_minutes" => cfg.commit_period_minutes = num(key, value)?,
                "attempts_scale" => cfg.attempts_scale = num(key, value)?,
                "start" => cfg.start = parse_instant(value).map_err(|e| invalid(format!("`start`: {e}")))?,
                "lock_fee_percent" => cfg.rules.lock_fee_percent = num(key, value)?,
                "max_locks" => cfg.rules.max_locks = num(key, value)?,
                "lock_hours" => cfg.rules.lock_duration = Duration::hours(num(key, value)?),
                "refund_fee_on_collect" => cfg.rules.refund_fee_on_collect = num(key, value)?,
                "theorems" => cfg.initial = InitialMarket::Synthetic { theorems: num(key, value)? },
                "initial_file" => initial_file = Some(value.to_string()),
                "initial_balance" => cfg.initial_balance = num(key, value)?,
                "total_supply" => cfg.total_supply = num(key, value)?,
                "mistake_rate" => cfg.mistake_rate = num(key, value)?,
                "allowed_axiom" => cfg.allowed_axioms.add_name(value),
                "agent" => {
                    let f: Vec<&str> = value.split_whitespace().collect();
                    if f.len() != 4 {
                        return Err(invalid(format!("line {}: expected `agent = <name> <strategy> <skill> <propensity>`", n + 1)));
                    }
                    agents.push(AgentPolicy {
                        name: AgentId::new(f[0]).map_err(|e| invalid(e.to_string()))?,
                        strategy: f[1].parse().map_err(invalid)?,
                        skill: num("skill", f[2])?,
                        sub_bounty_propensity: num("propensity", f[3])?,
                    });
                }
                _ => return Err(invalid(format!("line {}: unknown key `{key}`", n + 1))),
            }
        }
        if !agents.is_empty() {
            cfg.agents = agents;
        }
        cfg.validate()?;
        Ok((cfg, initial_file))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.horizon_hours == 0 {
            return Err(invalid("horizon_hours must be positive"));
        }
        if self.commit_period_minutes == 0 {
            return Err(invalid("commit_period_minutes must be positive"));
        }
        if !(self.attempts_scale > 0.0 && self.attempts_scale.is_finite()) {
            return Err(invalid("attempts_scale must be positive"));
        }
        if !(0.0..=1.0).contains(&self.mistake_rate) {
            return Err(invalid("mistake_rate must lie in [0, 1]"));
        }
        if self.agents.is_empty() {
            return Err(invalid("at least one agent is needed"));
        }
        if self.rules.lock_duration <= Duration::zero() {
            return Err(invalid("lock_hours must be positive"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in &self.agents {
            if a.name.is_admin() {
                return Err(invalid("`admin` cannot be a simulated agent"));
            }
            if !seen.insert(&a.name) {
                return Err(invalid(format!("agent {} listed twice", a.name)));
            }
            if !(a.skill > 0.0 && a.skill <= 2.0) {
                return Err(invalid(format!("skill of {} must lie in (0, 2]", a.name)));
            }
            if !(0.0..=1.0).contains(&a.sub_bounty_propensity) {
                return Err(invalid(format!("propensity of {} must lie in [0, 1]", a.name)));
            }
        }
        Ok(())
    }
}
