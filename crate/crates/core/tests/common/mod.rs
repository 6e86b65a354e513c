// Generators shared by the property and acceptance targets.
#![allow(dead_code)]

use chrono::Duration;
use proptest::prelude::*;

use proofmarket_core::devfile::{tokenize_str, TokenKind, MARKERS};
use proofmarket_core::ledger::{Account, AgentId, LedgerError, LedgerState, Rules};
use proofmarket_core::time::{parse_instant, Instant};

pub const AGENTS: [&str; 3] = ["Alice", "Bob", "Charlie"];
pub const ITEMS: usize = 15;

pub fn start() -> Instant {
    parse_instant("2026-02-14T00:00:00Z").unwrap()
}

pub fn agent(k: u8) -> AgentId {
    AgentId::new(AGENTS[k as usize % AGENTS.len()]).unwrap()
}

pub fn item(k: u8) -> String {
    format!("t{}", k as usize % ITEMS)
}

#[derive(Clone, Debug)]
pub enum Op {
    Place { creator: Option<u8>, item: u8, amount: i64 },
    Lock { agent: u8, item: u8, minutes: i64 },
    /// Try to lock every item at once.
    LockAll { agent: u8 },
    Prove { item: u8 },
    Collect { agent: u8, item: u8 },
    Advance { minutes: i64 },
    Expire,
    Adjust { agent: u8, delta: i64 },
    Remove { item: u8 },
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        6 => (proptest::option::weighted(0.5, 0u8..3), 0u8..ITEMS as u8, -5i64..=150)
            .prop_map(|(creator, item, amount)| Op::Place { creator, item, amount }),
        4 => (0u8..3, 0u8..ITEMS as u8, -60i64..=1500).prop_map(|(agent, item, minutes)| Op::Lock { agent, item, minutes }),
        2 => (0u8..3).prop_map(|agent| Op::LockAll { agent }),
        2 => (0u8..ITEMS as u8).prop_map(|item| Op::Prove { item }),
        3 => (0u8..3, 0u8..ITEMS as u8).prop_map(|(agent, item)| Op::Collect { agent, item }),
        2 => (0i64..=720).prop_map(|minutes| Op::Advance { minutes }),
        1 => Just(Op::Expire),
        1 => (0u8..3, -600i64..=300).prop_map(|(agent, delta)| Op::Adjust { agent, delta }),
        1 => (0u8..ITEMS as u8).prop_map(|item| Op::Remove { item }),
    ]
}

pub fn fresh_ledger(rules: Rules) -> LedgerState {
    let agents = AGENTS.iter().map(|a| (AgentId::new(a).unwrap(), 500));
    LedgerState::new(45_000, agents, rules, start()).unwrap()
}

/// Apply one operation through the checked ledger API. `now` only moves
/// forward.
pub fn apply(state: &mut LedgerState, now: &mut Instant, op: &Op) -> Result<(), LedgerError> {
    match op {
        Op::Place { creator, item: i, amount } => {
            let who = creator.map_or(Account::Admin, |c| Account::Agent(agent(c)));
            state.place_bounty(&who, &item(*i), *amount, *now)
        }
        Op::Lock { agent: a, item: i, minutes } => {
            state.lock_until(&agent(*a), &item(*i), *now, *now + Duration::minutes(*minutes)).map(|_| ())
        }
        Op::LockAll { agent: a } => {
            let mut last = Ok(());
            let mut any = false;
            for i in 0..ITEMS as u8 {
                last = state.lock(&agent(*a), &item(i), *now).map(|_| ());
                any |= last.is_ok();
            }
            if any {
                Ok(())
            } else {
                last
            }
        }
        Op::Prove { item: i } => state.mark_proved(&item(*i), *now),
        Op::Collect { agent: a, item: i } => state.collect(&agent(*a), &item(*i), *now).map(|_| ()),
        Op::Advance { minutes } => {
            *now += Duration::minutes(*minutes);
            Ok(())
        }
        Op::Expire => state.expire_locks(*now).map(|_| ()),
        Op::Adjust { agent: a, delta } => state.admin_adjust(&agent(*a), *delta, "test", *now),
        Op::Remove { item: i } => state.remove_bounty(&item(*i), *now),
    }
}

/// Text that spells prover keywords without being a ledger marker.
pub fn keyword_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("Qed.".to_string()),
        Just("Admitted.".to_string()),
        Just("Theorem fake : False.".to_string()),
        Just("Lemma cheat : forall x, x = x.".to_string()),
        Just("Definition bogus := 0.".to_string()),
        Just("Axiom anything : False.".to_string()),
        Just("(* Qed. *)".to_string()),
        Just("(* Theorem inner : True. Qed. (* Admitted. *) *)".to_string()),
        "[a-z_]{1,8}\\.?",
    ];
    proptest::collection::vec(piece, 1..5).prop_map(|v| v.join(" "))
}

/// Insert comments carrying `texts` into `src`: before whitespace runs,
/// and inside existing non-marker comments. `picks` chooses positions.
pub fn inject(src: &str, picks: &[(usize, bool)], texts: &[String]) -> String {
    let tokens = tokenize_str(src).unwrap();
    let spots: Vec<(usize, bool)> = tokens
        .iter()
        .filter_map(|t| match t.kind {
            TokenKind::Whitespace => Some((t.offset, false)),
            TokenKind::Comment if !MARKERS.iter().any(|m| t.text.contains(m)) => Some((t.offset + 2, true)),
            _ => None,
        })
        .collect();
    if spots.is_empty() {
        return src.to_string();
    }
    let mut edits: Vec<(usize, String)> = picks
        .iter()
        .zip(texts)
        .map(|(&(k, inside), text)| {
            let (at, is_comment) = spots[k % spots.len()];
            if is_comment && inside {
                (at, format!(" {text} "))
            } else {
                (at, format!(" (* {text} *)"))
            }
        })
        .collect();
    edits.sort_by_key(|e| std::cmp::Reverse(e.0));
    let mut out = src.to_string();
    for (at, text) in edits {
        out.insert_str(at, &text);
    }
    out
}
