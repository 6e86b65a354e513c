mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::strategy::ValueTree;

use common::{apply, fresh_ledger, inject, keyword_text, op};
use proofmarket_core::depgraph::{DepGraph, DepGraphError, NodeStatus};
use proofmarket_core::devfile::{canonicalize, render, tokenize_str, DevFile, TokenKind, KEYWORDS};
use proofmarket_core::ledger::{lifecycle_report, Account, Rules};

fn source_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        "[ \t\n]{1,3}",
        "[A-Za-z_][A-Za-z0-9_']{0,6}",
        "[.:=(),\\[\\]{}+*-]",
        Just("(* note *)".to_string()),
        Just("(* Qed. (* nested Admitted. *) *)".to_string()),
        Just("Qed.".to_string()),
        Just("Theorem".to_string()),
        "[\u{3b1}-\u{3c9}]",
    ];
    proptest::collection::vec(piece, 0..60).prop_map(|v| v.concat())
}

#[derive(Clone, Debug)]
struct GenItem {
    kind: usize,
    admitted: bool,
    steps: usize,
    bounty: Option<i64>,
    note: Option<String>,
    uses: usize,
}

fn development() -> impl Strategy<Value = String> {
    let item = (0usize..3, any::<bool>(), 1usize..6, proptest::option::of(1i64..300), proptest::option::of(keyword_text()), any::<usize>())
        .prop_map(|(kind, admitted, steps, bounty, note, uses)| GenItem { kind, admitted, steps, bounty, note, uses });
    (proptest::collection::vec(item, 1..12), proptest::collection::vec(0i64..900, 1..4)).prop_map(|(items, balances)| {
        let mut s = String::from("(* generated development *)\n(* SUPPLY: 45000 *)\n");
        for (k, b) in balances.iter().enumerate() {
            s.push_str(&format!("(* BALANCE: {} {b} *)\n", common::AGENTS[k]));
        }
        s.push('\n');
        for (k, it) in items.iter().enumerate() {
            let used = if k == 0 { "True".to_string() } else { format!("item_{}", it.uses % k) };
            if let Some(n) = &it.note {
                s.push_str(&format!("(* {n} *)\n"));
            }
            if it.kind == 0 {
                s.push_str(&format!("Definition item_{k} := wrap {used}.\n\n"));
                continue;
            }
            if let Some(b) = it.bounty {
                s.push_str(&format!("(* BOUNTY: {b} *)\n"));
            }
            let kw = if it.kind == 1 { "Lemma" } else { "Theorem" };
            s.push_str(&format!("{kw} item_{k} : holds {used}.\n"));
            for j in 0..it.steps {
                s.push_str(&format!("  apply (step {used} {j}).\n"));
            }
            s.push_str(if it.admitted { "Admitted.\n\n" } else { "Qed.\n\n" });
        }
        s
    })
}

proptest! {
    #[test]
    fn tokens_cover_the_source(src in source_text()) {
        if let Ok(tokens) = tokenize_str(&src) {
            let joined: String = tokens.iter().map(|t| t.text.as_str()).collect();
            prop_assert_eq!(&joined, &src);
            let mut at = 0;
            for t in &tokens {
                prop_assert_eq!(t.offset, at);
                at += t.text.len();
            }
        }
    }

    #[test]
    fn keywords_inside_comments_stay_comments(body in keyword_text(), pre in "[a-z ]{0,8}") {
        let src = format!("{pre}(* {body} *)");
        let tokens = tokenize_str(&src).unwrap();
        for t in &tokens {
            prop_assert!(t.kind != TokenKind::Keyword, "{:?}", t);
        }
        prop_assert!(!KEYWORDS.iter().any(|k| tokens.iter().any(|t| t.is_keyword(k))));
    }

    #[test]
    fn canonical_statement_ignores_layout(words in proptest::collection::vec("[a-z]{1,5}", 1..8), gaps in proptest::collection::vec(0usize..3, 8), note in keyword_text()) {
        let plain = words.join(" ");
        let mut spaced = String::new();
        for (k, w) in words.iter().enumerate() {
            spaced.push_str(w);
            spaced.push_str(["  ", "\n    ", &format!(" (* {note} *) ")][gaps[k % gaps.len()]].as_ref());
        }
        prop_assert_eq!(canonicalize(&plain).unwrap(), canonicalize(&spaced).unwrap());
    }

    #[test]
    fn render_is_stable(src in development()) {
        let once = render(&DevFile::from_source(&src).unwrap());
        let parsed = DevFile::from_source(&once).unwrap();
        prop_assert_eq!(render(&parsed), once.clone());
        let orig = DevFile::from_source(&src).unwrap();
        prop_assert_eq!(orig.items.len(), parsed.items.len());
        for (a, b) in orig.items.iter().zip(&parsed.items) {
            prop_assert_eq!(&a.statement_text, &b.statement_text);
            prop_assert_eq!(a.proof_status, b.proof_status);
            prop_assert_eq!(&a.annotations.iter().map(|x| &x.kind).collect::<Vec<_>>(), &b.annotations.iter().map(|x| &x.kind).collect::<Vec<_>>());
        }
    }

    #[test]
    fn injected_comments_leave_items_alone(src in development(), picks in proptest::collection::vec((any::<usize>(), any::<bool>()), 1..6), texts in proptest::collection::vec(keyword_text(), 6)) {
        let a = DevFile::from_source(&src).unwrap();
        let b = DevFile::from_source(&inject(&src, &picks, &texts)).unwrap();
        prop_assert_eq!(a.items.len(), b.items.len());
        for (x, y) in a.items.iter().zip(&b.items) {
            prop_assert_eq!(&x.name, &y.name);
            prop_assert_eq!(x.proof_status, y.proof_status);
            prop_assert_eq!(&x.statement_text, &y.statement_text);
            prop_assert_eq!(x.canonical_proof(), y.canonical_proof());
        }
        prop_assert_eq!(&a.balances, &b.balances);
    }

    #[test]
    fn lock_fee_rounds_up(bounty in 1i64..1_000_000, pct in 0u32..=100) {
        let fee = Rules { lock_fee_percent: pct, ..Rules::default() }.lock_fee(bounty);
        let exact = bounty * i64::from(pct);
        prop_assert!(fee * 100 >= exact);
        prop_assert!((fee - 1) * 100 < exact || fee == 0);
    }

    #[test]
    fn failed_operations_change_nothing(ops in proptest::collection::vec(op(), 1..60)) {
        let mut state = fresh_ledger(Rules::default());
        let mut now = common::start();
        for o in &ops {
            let before = state.clone();
            if apply(&mut state, &mut now, o).is_err() {
                prop_assert_eq!(&state.balances, &before.balances);
                prop_assert_eq!(&state.open_bounties, &before.open_bounties);
                prop_assert_eq!(&state.locks, &before.locks);
                prop_assert_eq!(state.admin_sink, before.admin_sink);
                prop_assert_eq!(state.log.len(), before.log.len());
            }
        }
    }

    #[test]
    fn replaying_the_log_reproduces_the_state(ops in proptest::collection::vec(op(), 1..60)) {
        let mut state = fresh_ledger(Rules::default());
        let mut now = common::start();
        for o in &ops {
            let _ = apply(&mut state, &mut now, o);
        }
        let mut again = fresh_ledger(Rules::default());
        again.replay(&state.log).unwrap();
        prop_assert_eq!(&again.balances, &state.balances);
        prop_assert_eq!(&again.open_bounties, &state.open_bounties);
        prop_assert_eq!(again.admin_sink, state.admin_sink);
    }

    #[test]
    fn still_open_matches_the_final_ledger(ops in proptest::collection::vec(op(), 1..80)) {
        let mut state = fresh_ledger(Rules::default());
        let mut now = common::start();
        for o in &ops {
            let _ = apply(&mut state, &mut now, o);
        }
        let r = lifecycle_report(&state.log);
        prop_assert!(r.is_partition());
        let open: i64 = state.open_bounties.values().filter(|b| b.creator != Account::Admin).map(|b| b.amount).sum();
        prop_assert_eq!(r.still_open, open);
    }

    #[test]
    fn back_edge_is_a_cycle(n in 2usize..20, extra in proptest::collection::vec((0usize..20, 0usize..20), 0..30)) {
        let nodes: Vec<_> = (0..n).map(|k| (format!("n{k}"), NodeStatus::Qed)).collect();
        let mut edges: Vec<(usize, usize)> = (1..n).map(|k| (k, k - 1)).collect();
        edges.extend(extra.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a > b));
        prop_assert!(DepGraph::from_edges(nodes.clone(), &edges).classify().is_ok());
        edges.push((0, n - 1));
        let cycle = DepGraph::from_edges(nodes, &edges).classify();
        prop_assert!(matches!(cycle, Err(DepGraphError::DependencyCycle(_))), "{:?}", cycle);
    }
}

#[test]
fn generated_developments_parse() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..50 {
        let src = development().new_tree(&mut runner).unwrap().current();
        for i in DevFile::from_source(&src).unwrap().items {
            *kinds.entry(format!("{}/{}", i.kind, i.proof_status)).or_default() += 1;
        }
    }
    assert!(kinds.len() >= 4, "{kinds:?}");
}
