//! Ready-made developments, revision pairs and event logs used by the test
//! suites and the CLI examples.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::guard::ViolationCode;
use crate::ledger::{Account, AgentId, LedgerState, MarketEvent};
use crate::time::{parse_instant, Instant};

/// Algebraic topology theorems with long proofs, with their line counts.
pub const TABLE1: [(&str, usize); 21] = [
    ("cyclic_infinite_order_iff_Z", 1999),
    ("thm60_1_pi1_product", 1474),
    ("Theorem_51_3_reparametrization", 1446),
    ("ex53_4_composition_covering", 1426),
    ("s55_lemma58_4_homotopy_path_continuous", 1351),
    ("lemma58_4_homotopy_path", 1349),
    ("thm53_3_product_covering", 1339),
    ("ex58_2h_open_disk_simply_connected", 1102),
    ("ex53_6b_compact_finite_fiber", 1054),
    ("ex67_4b_free_abelian_no_torsion", 920),
    ("Theorem_51_2_left_identity", 906),
    ("Theorem_51_2_right_identity", 759),
    ("Theorem_51_2_right_inverse", 705),
    ("thm53_2_subspace_covering", 674),
    ("path_concat_well_defined_on_classes", 581),
    ("lemma52_1_cancel_double_basepoint_change_class", 562),
    ("Lemma_51_1_path_homotopy_trans", 523),
    ("evenly_covered_open_subset_top", 521),
    ("lemma67_1_converse", 446),
    ("ex67_4a_torsion_subgroup", 423),
    ("ex53_1_discrete_projection_covering", 420),
];

/// A proof of exactly `length` normalized steps, terminator included.
pub fn proof_of_length(length: usize, terminator: &str) -> String {
    let mut s = String::new();
    for k in 1..length {
        let _ = writeln!(s, "  apply step_{k}.");
    }
    let _ = writeln!(s, "{terminator}.");
    s
}

/// A development whose long proofs reproduce [`TABLE1`], plus a few short
/// or unfinished theorems that a `> 400` filter must leave out.
pub fn table1_development() -> String {
    let mut s = String::from("(* Algebraic topology, long proofs. *)\n\nDefinition top_space := fun X => X.\n\n");
    let mut theorems: Vec<(String, usize, &str)> =
        TABLE1.iter().map(|(n, l)| (n.to_string(), *l, "Qed")).collect();
    theorems.push(("lemma_boundary_400".into(), 400, "Qed"));
    theorems.push(("lemma_below_399".into(), 399, "Qed"));
    theorems.push(("retract_short".into(), 37, "Qed"));
    theorems.push(("circle_not_contractible".into(), 12, "Admitted"));
    // file order differs from length order on purpose
    theorems.sort_by(|a, b| a.0.cmp(&b.0));
    for (name, length, term) in theorems {
        let _ = writeln!(s, "Theorem {name} : forall X, top_space X -> prop_{name} X.");
        s.push_str(&proof_of_length(length, term));
        s.push('\n');
    }
    s
}

/// The dependency chain behind the Brouwer fixed-point theorem, resting on
/// an admitted computation of the fundamental group of the circle.
pub const BROUWER: &str = "\
(* Brouwer fixed-point theorem in dimension two. *)

Definition circle := unit_sphere 2.
Definition disk := unit_ball 2.

Lemma path_lifting : forall p, covering_map exp_map -> exists q, lifts q p.
intro p. intro H. exact (lift_exists p H).
Qed.

Lemma lifting_unique : forall p q r, lifts q p -> lifts r p -> q = r.
intros p q r Hq Hr. apply path_lifting. exact (unique_from_start Hq Hr).
apply eq_refl.
Qed.

(* BOUNTY: 100 *)
Theorem pi1_circle_iso_Z : group_iso (pi1 circle) Z.
apply lifting_unique. apply degree_map.
Admitted.

Lemma inclusion_not_nulhomotopic : ~ nulhomotopic (inclusion circle disk).
intro H. apply pi1_circle_iso_Z.
apply induced_trivial. exact H.
apply Z_nontrivial.
Qed.

Theorem nonvanishing_vector_field : forall v, continuous v -> exists x, v x = 0.
intros v Hv. apply inclusion_not_nulhomotopic. exact (retract_from_field v Hv).
apply by_contradiction. apply restrict_to_boundary.
apply homotopy_to_inclusion.
apply done.
Qed.

Theorem brouwer_fixed_point : forall f, continuous f -> exists x, f x = x.
intros f Hf. apply nonvanishing_vector_field.
exact (difference_field f Hf).
apply fixed_from_zero.
apply by_cases.
apply finish.
apply qed_step.
Qed.
";

/// One proposed revision of a development, with the codes a correct guard
/// must report for it.
#[derive(Clone, Debug)]
pub struct RevisionCase {
    pub name: &'static str,
    pub previous: String,
    pub proposed: String,
    pub committer: AgentId,
    pub now: Instant,
    pub expected: BTreeSet<ViolationCode>,
}

pub const CASE_NOW: &str = "2026-02-17T12:00:00Z";

/// Shared starting point of the revision corpus. Bob holds a live lock on
/// `ex68_3` with a partial proof; Charlie holds one on `lift_unique`.
pub const MARKET_BASE: &str = "\
(* Shared development. *)
(* SUPPLY: 45000 *)
(* BALANCE: Alice 500 *)
(* BALANCE: Bob 500 *)
(* BALANCE: Charlie 500 *)
(* BALANCE: Dave 500 *)

Definition loop_space := fun x => paths x x.

(* BOUNTY: 100 *)
Theorem fundamental_group_is_group : forall x, is_group (loop_space x).
Admitted.

(* BOUNTY: 60 *)
(* LOCK: Bob UNTIL 2026-02-17T20:00:00Z *)
Theorem ex68_3 : forall g, torsion_free g.
intro g. apply partial_step.
Admitted.

(* BOUNTY: 40 *)
Lemma path_concat_assoc : forall p q r, concat p (concat q r) = concat (concat p q) r.
Admitted.

(* BOUNTY: 80 *)
(* LOCK: Charlie UNTIL 2026-02-18T06:00:00Z *)
Lemma lift_unique : forall p, unique_lift p.
Admitted.
";

/// Replace one occurrence of `from`, which must be present.
pub fn edit(src: &str, from: &str, to: &str) -> String {
    assert!(src.contains(from), "fixture edit target missing: {from:?}");
    src.replacen(from, to, 1)
}

fn case(name: &'static str, previous: &str, proposed: String, committer: &str, expected: &[ViolationCode]) -> RevisionCase {
    RevisionCase {
        name,
        previous: previous.to_string(),
        proposed,
        committer: AgentId::new(committer).expect("fixture agent"),
        now: parse_instant(CASE_NOW).expect("fixture instant"),
        expected: expected.iter().copied().collect(),
    }
}

/// A previous file in which Alice already holds ten live locks.
fn ten_locks_base() -> String {
    let mut s = String::from("(* SUPPLY: 45000 *)\n(* BALANCE: Alice 500 *)\n\n");
    for k in 0..11 {
        let _ = writeln!(s, "(* BOUNTY: 20 *)");
        if k < 10 {
            let _ = writeln!(s, "(* LOCK: Alice UNTIL 2026-02-17T20:00:00Z *)");
        }
        let _ = writeln!(s, "Lemma step_{k} : holds {k}.\nAdmitted.\n");
    }
    s
}

/// One revision pair per violation code, each triggering exactly that code.
pub fn violation_corpus() -> Vec<RevisionCase> {
    use ViolationCode::*;
    let b = MARKET_BASE;
    let locks = ten_locks_base();
    vec![
        case("statement_quantifier", b, edit(b, "forall x, is_group", "exists x, is_group"), "Alice", &[StatementMutated]),
        case("definition_body", b, edit(b, "fun x => paths x x", "fun x => paths x (inv x)"), "Alice", &[DefinitionMutated]),
        case("foreign_lock_removed", b, edit(b, "(* LOCK: Bob UNTIL 2026-02-17T20:00:00Z *)\n", ""), "Alice", &[ForeignLockTouched]),
        case(
            "foreign_proof_replaced",
            b,
            edit(b, "intro g. apply partial_step.", "intro g. exact (all_torsion_free g)."),
            "Alice",
            &[ForeignProofOverwrittenWhileLocked],
        ),
        case("balance_edited", b, edit(b, "BALANCE: Alice 500", "BALANCE: Alice 600"), "Alice", &[BalanceTransitionInvalid]),
        case(
            "eleventh_lock",
            &locks,
            edit(
                &edit(&locks, "(* BOUNTY: 20 *)\nLemma step_10", "(* BOUNTY: 20 *)\n(* LOCK: Alice UNTIL 2026-02-18T12:00:00Z *)\nLemma step_10"),
                "BALANCE: Alice 500",
                "BALANCE: Alice 498",
            ),
            "Alice",
            &[LockCountExceeded],
        ),
        case(
            "lock_for_two_days",
            b,
            edit(
                &edit(b, "(* BOUNTY: 40 *)\n", "(* BOUNTY: 40 *)\n(* LOCK: Alice UNTIL 2026-02-19T12:00:00Z *)\n"),
                "BALANCE: Alice 500",
                "BALANCE: Alice 496",
            ),
            "Alice",
            &[LockExpiryTooFar],
        ),
        case("balance_negative", b, edit(b, "BALANCE: Alice 500", "BALANCE: Alice -5"), "Alice", &[NegativeBalance]),
        case(
            "zero_sub_bounty",
            b,
            format!("{b}\n(* SUBBOUNTY: Alice 0 *)\nLemma concat_unit : forall p, concat p id = p.\nAdmitted.\n"),
            "Alice",
            &[NonPositiveBounty],
        ),
        case(
            "collect_on_admitted",
            b,
            edit(
                &edit(b, "(* BOUNTY: 40 *)\n", "(* BOUNTY: 40 *)\n(* COLLECTED: Alice 40 *)\n"),
                "BALANCE: Alice 500",
                "BALANCE: Alice 540",
            ),
            "Alice",
            &[CollectWithoutQed],
        ),
        case(
            "collect_past_locker",
            b,
            edit(
                &edit(
                    b,
                    "(* LOCK: Charlie UNTIL 2026-02-18T06:00:00Z *)\nLemma lift_unique : forall p, unique_lift p.\nAdmitted.",
                    "(* COLLECTED: Alice 80 *)\nLemma lift_unique : forall p, unique_lift p.\nintro p. exact (lifting_uniqueness p).\nQed.",
                ),
                "BALANCE: Alice 500",
                "BALANCE: Alice 580",
            ),
            "Alice",
            &[CollectWrongBeneficiary],
        ),
        case(
            "marker_in_proof_comment",
            b,
            edit(
                b,
                "concat (concat p q) r.\nAdmitted.",
                "concat (concat p q) r.\nintros p q r. (* COLLECTED: Alice 40 *) apply concat_assoc_raw.\nAdmitted.",
            ),
            "Alice",
            &[KeywordInCommentAbuse],
        ),
        case(
            "item_removed",
            b,
            edit(b, "(* BOUNTY: 40 *)\nLemma path_concat_assoc : forall p q r, concat p (concat q r) = concat (concat p q) r.\nAdmitted.\n\n", ""),
            "Alice",
            &[ItemDeleted],
        ),
        case(
            "new_axiom",
            b,
            format!("{b}\nAxiom excluded_middle : forall P, P \\/ ~ P.\n"),
            "Alice",
            &[AxiomIntroduced],
        ),
    ]
}

/// Revisions every correct guard accepts.
pub fn clean_corpus() -> Vec<RevisionCase> {
    let b = MARKET_BASE;
    let lapsed = edit(b, "LOCK: Bob UNTIL 2026-02-17T20:00:00Z", "LOCK: Bob UNTIL 2026-02-16T20:00:00Z");
    vec![
        case("no_change", b, b.to_string(), "Alice", &[]),
        case(
            "prove_and_collect",
            b,
            edit(
                &edit(
                    &edit(b, "(* BOUNTY: 100 *)\n", "(* BOUNTY: 100 *)\n(* COLLECTED: Alice 100 *)\n"),
                    "is_group (loop_space x).\nAdmitted.",
                    "is_group (loop_space x).\nintro x. exact (loops_form_group x).\nQed.",
                ),
                "BALANCE: Alice 500",
                "BALANCE: Alice 600",
            ),
            "Alice",
            &[],
        ),
        case(
            "lock_for_a_day",
            b,
            edit(
                &edit(b, "(* BOUNTY: 40 *)\n", "(* BOUNTY: 40 *)\n(* LOCK: Alice UNTIL 2026-02-18T12:00:00Z *)\n"),
                "BALANCE: Alice 500",
                "BALANCE: Alice 496",
            ),
            "Alice",
            &[],
        ),
        case(
            "prove_for_locker",
            b,
            edit(
                &edit(
                    b,
                    "(* LOCK: Charlie UNTIL 2026-02-18T06:00:00Z *)\nLemma lift_unique : forall p, unique_lift p.\nAdmitted.",
                    "(* COLLECTED: Charlie 80 *)\nLemma lift_unique : forall p, unique_lift p.\nintro p. exact (lifting_uniqueness p).\nQed.",
                ),
                "BALANCE: Charlie 500",
                "BALANCE: Charlie 580",
            ),
            "Alice",
            &[],
        ),
        case(
            "sub_bounty",
            b,
            edit(
                &format!("{b}\n(* SUBBOUNTY: Alice 30 *)\nLemma concat_unit : forall p, concat p id = p.\nAdmitted.\n"),
                "BALANCE: Alice 500",
                "BALANCE: Alice 470",
            ),
            "Alice",
            &[],
        ),
        case(
            "locker_extends_proof",
            b,
            edit(b, "intro g. apply partial_step.", "intro g. apply partial_step.\napply second_step."),
            "Bob",
            &[],
        ),
        case(
            "new_admitted_theorem",
            b,
            format!("{b}\nTheorem pi1_circle : group_iso (pi1 circle) Z.\nAdmitted.\n"),
            "Alice",
            &[],
        ),
        case(
            "layout_and_comments",
            b,
            edit(
                b,
                "forall x, is_group (loop_space x).",
                "forall x, (* Qed Admitted Theorem *)\n    is_group   (loop_space x).",
            ),
            "Alice",
            &[],
        ),
        case(
            "admin_places_bounty",
            b,
            format!("{b}\n(* BOUNTY: 50 *)\nTheorem covering_lifts : forall p, lifts p.\nAdmitted.\n"),
            "admin",
            &[],
        ),
        case("admin_resets_balance", b, edit(b, "BALANCE: Charlie 500", "BALANCE: Charlie 450"), "admin", &[]),
        case(
            "replace_after_lock_lapsed",
            &lapsed,
            edit(&lapsed, "intro g. apply partial_step.", "intro g. exact (all_torsion_free g)."),
            "Alice",
            &[],
        ),
    ]
}

/// A replayable event log whose agent-created bounties split 709 tokens into
/// 279 collected by their creators, 114 collected by others, 312 still open
/// and 4 withdrawn.
pub fn lifecycle_fixture_log() -> Vec<MarketEvent> {
    let t = |h: i64| parse_instant("2026-02-15T00:00:00Z").expect("fixture instant") + chrono::Duration::hours(h);
    let a = |n: &str| AgentId::new(n).expect("fixture agent");
    let mut s = LedgerState::with_agents(&["Alice", "Bob", "Charlie", "Dave"], t(0)).expect("fixture ledger");
    let sub = |s: &mut LedgerState, who: &str, item: &str, amount, h| {
        s.place_bounty(&Account::Agent(a(who)), item, amount, t(h)).expect("fixture placement");
    };
    let prove = |s: &mut LedgerState, who: &str, item: &str, h| {
        s.mark_proved(item, t(h)).expect("fixture proof");
        s.collect(&a(who), item, t(h)).expect("fixture collect");
    };
    for (k, amount) in [100, 100, 59].into_iter().enumerate() {
        let item = format!("alice_sub_{k}");
        let h = k as i64;
        sub(&mut s, "Alice", &item, amount, h);
        prove(&mut s, "Alice", &item, h);
    }
    sub(&mut s, "Bob", "bob_sub_0", 60, 3);
    prove(&mut s, "Charlie", "bob_sub_0", 4);
    sub(&mut s, "Bob", "bob_sub_1", 54, 5);
    s.lock(&a("Charlie"), "bob_sub_1", t(5)).expect("fixture lock");
    prove(&mut s, "Dave", "bob_sub_1", 6);
    // Bob locks his own sub-bounty; Alice finishes it, Bob is still paid
    sub(&mut s, "Bob", "bob_sub_2", 20, 7);
    s.lock(&a("Bob"), "bob_sub_2", t(7)).expect("fixture lock");
    prove(&mut s, "Alice", "bob_sub_2", 8);
    sub(&mut s, "Dave", "dave_sub_0", 200, 9);
    sub(&mut s, "Charlie", "charlie_sub_0", 112, 10);
    sub(&mut s, "Alice", "alice_sub_3", 4, 11);
    s.remove_bounty("alice_sub_3", t(12)).expect("fixture removal");
    s.log
}

/// A linear history of `n` revisions whose sizes move up and down.
pub fn synthetic_history(n: usize) -> Vec<String> {
    let mut revs = Vec::with_capacity(n);
    let mut theorems = 0usize;
    for k in 0..n {
        // every fifth commit is a refactoring that drops a theorem
        if k % 5 == 4 && theorems > 0 {
            theorems -= 1;
        } else {
            theorems += 1 + k % 3;
        }
        let mut s = String::from("Definition base := tt.\n");
        for j in 0..theorems {
            let _ = writeln!(s, "Theorem t{j} : holds {j}.\n  exact base.\nQed.");
        }
        revs.push(s);
    }
    revs
}
