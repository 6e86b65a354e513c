use std::collections::BTreeSet;

use proofmarket_core::depgraph::AxiomIndex;
use proofmarket_core::devfile::DevFile;
use proofmarket_core::fixtures::{clean_corpus, violation_corpus, RevisionCase};
use proofmarket_core::guard::{analyze, check_sources, naive_line_check, RevisionPair, Verdict, ViolationCode};
use proofmarket_core::ledger::{LedgerState, Rules};

fn run(c: &RevisionCase) -> Verdict {
    check_sources(&c.previous, &c.proposed, c.committer.clone(), c.now, Rules::default(), AxiomIndex::default()).unwrap()
}

#[test]
fn each_violation_fixture_flags_exactly_its_code() {
    let corpus = violation_corpus();
    let covered: BTreeSet<ViolationCode> = corpus.iter().flat_map(|c| c.expected.iter().copied()).collect();
    assert_eq!(covered, ViolationCode::ALL.into_iter().collect());
    for c in &corpus {
        let v = run(c);
        assert_eq!(v.codes(), c.expected, "{}: {:#?}", c.name, v.violations);
    }
}

#[test]
fn clean_fixtures_are_accepted() {
    for c in clean_corpus() {
        let v = run(&c);
        assert!(v.is_clean(), "{}: {:#?}", c.name, v.violations);
    }
}

#[test]
fn accepted_revisions_replay_to_the_proposed_ledger() {
    for c in clean_corpus() {
        let prev = DevFile::from_source(&c.previous).unwrap();
        let next = DevFile::from_source(&c.proposed).unwrap();
        let verdict = analyze(&RevisionPair::new(&prev, &next, c.committer.clone(), c.now));
        let mut state = LedgerState::from_devfile(&prev, Rules::default());
        state.replay(&verdict.events).unwrap();
        let stated = LedgerState::from_devfile(&next, Rules::default());
        assert_eq!(state.balances, stated.balances, "{}", c.name);
        assert_eq!(state.open_bounties, stated.open_bounties, "{}", c.name);
        assert_eq!(state.admin_sink, stated.admin_sink, "{}", c.name);
        let live = |s: &LedgerState| -> Vec<_> {
            s.locks.iter().filter(|(_, l)| l.is_live(c.now)).map(|(k, l)| (k.clone(), l.holder.clone(), l.expires)).collect()
        };
        assert_eq!(live(&state), live(&stated), "{}", c.name);
    }
}

#[test]
fn locked_replacement_differs_from_unlocked_one() {
    let locked = violation_corpus().into_iter().find(|c| c.name == "foreign_proof_replaced").unwrap();
    assert_eq!(run(&locked).codes(), BTreeSet::from([ViolationCode::ForeignProofOverwrittenWhileLocked]));
    let lapsed = clean_corpus().into_iter().find(|c| c.name == "replace_after_lock_lapsed").unwrap();
    assert!(run(&lapsed).is_clean());
}

#[test]
fn naive_and_stream_checkers_agree_on_clean_pairs() {
    for c in clean_corpus() {
        assert!(naive_line_check(&c.previous, &c.proposed, c.now, &Rules::default()).is_empty(), "{}", c.name);
    }
}

#[test]
fn both_checkers_report_a_negative_balance() {
    let c = violation_corpus().into_iter().find(|c| c.name == "balance_negative").unwrap();
    let naive: BTreeSet<_> = naive_line_check(&c.previous, &c.proposed, c.now, &Rules::default()).iter().map(|v| v.code).collect();
    assert_eq!(naive, run(&c).codes());
}

#[test]
fn smuggled_qed_splits_the_checkers() {
    let base = proofmarket_core::fixtures::MARKET_BASE;
    let proposed = base
        .replace("(* BOUNTY: 40 *)\n", "(* BOUNTY: 40 *)\n(* COLLECTED: Alice 40 *)\n")
        .replace("concat (concat p q) r.\nAdmitted.", "concat (concat p q) r.\n(* Qed. *)\nAdmitted.")
        .replace("BALANCE: Alice 500", "BALANCE: Alice 540");
    let now = proofmarket_core::time::parse_instant("2026-02-17T12:00:00Z").unwrap();
    let naive = naive_line_check(base, &proposed, now, &Rules::default());
    let stream = check_sources(base, &proposed, "Alice".parse().unwrap(), now, Rules::default(), AxiomIndex::default()).unwrap();
    assert!(naive.is_empty());
    assert_eq!(stream.codes(), BTreeSet::from([ViolationCode::CollectWithoutQed]));
}

#[test]
fn lock_with_offset_timestamp_is_judged_in_utc() {
    let base = proofmarket_core::fixtures::MARKET_BASE;
    // 10:00+05:00 is 05:00Z, inside the 24 hour window from 06:00Z the day before
    let proposed = base
        .replace("(* BOUNTY: 40 *)\n", "(* BOUNTY: 40 *)\n(* LOCK: Alice UNTIL 2026-02-18T10:00:00+05:00 *)\n")
        .replace("BALANCE: Alice 500", "BALANCE: Alice 496");
    let now = proofmarket_core::time::parse_instant("2026-02-17T06:00:00Z").unwrap();
    let stream = check_sources(base, &proposed, "Alice".parse().unwrap(), now, Rules::default(), AxiomIndex::default()).unwrap();
    assert!(stream.is_clean(), "{:#?}", stream.violations);
    let naive = naive_line_check(base, &proposed, now, &Rules::default());
    assert_eq!(naive.iter().map(|v| v.code).collect::<Vec<_>>(), vec![ViolationCode::LockExpiryTooFar]);
}

#[test]
fn appending_an_admitted_theorem_keeps_a_revision_accepted() {
    let cfg = proofmarket_core::sim::SimConfig { seed: 9, horizon_hours: 12, ..Default::default() };
    let t = proofmarket_core::sim::run(&cfg).unwrap();
    let mut pairs: Vec<_> = clean_corpus().into_iter().map(|c| (c.previous, c.proposed, c.committer, c.now)).collect();
    for (k, c) in t.commits.iter().enumerate() {
        pairs.push((t.revisions[k].clone(), t.revisions[k + 1].clone(), c.agent.clone(), c.time));
    }
    for (prev, next, who, now) in pairs {
        let grown = format!("{next}\nTheorem appended_extra : forall n, n = n.\nAdmitted.\n");
        let v = check_sources(&prev, &grown, who, now, Rules::default(), AxiomIndex::default()).unwrap();
        assert!(v.is_clean(), "{:?}", v.violations);
    }
}
