use std::time::Instant as Clock;

use proofmarket_core::devfile::DevFile;
use proofmarket_core::guard::check_sources;
use proofmarket_core::ledger::{lifecycle_report, LedgerState, Rules};
use proofmarket_core::sim::{run, sweep, AgentPolicy, InitialMarket, SimConfig, SimTrace, Strategy};

fn revalidate(cfg: &SimConfig, trace: &SimTrace) {
    for (k, c) in trace.commits.iter().enumerate() {
        let v = check_sources(&trace.revisions[k], &trace.revisions[k + 1], c.agent.clone(), c.time, cfg.rules.clone(), cfg.allowed_axioms.clone())
            .unwrap();
        assert!(v.is_clean(), "commit {k}: {:?}", v.violations);
        assert_eq!(v.events, c.events, "commit {k}");
    }
}

#[test]
fn default_run_is_deterministic_and_sound() {
    let cfg = SimConfig { seed: 11, ..SimConfig::default() };
    let clock = Clock::now();
    let a = run(&cfg).unwrap();
    let elapsed = clock.elapsed();
    let b = run(&cfg).unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert!(elapsed.as_secs() < 60, "{elapsed:?}");
    revalidate(&cfg, &a);
    let collects = a.events().iter().filter(|e| e.kind == proofmarket_core::ledger::EventKind::Collect).count();
    assert!(collects > 0);
    assert!(a.commits.len() > 50);
}

#[test]
fn conservation_at_every_snapshot() {
    let cfg = SimConfig { seed: 3, horizon_hours: 24, ..SimConfig::default() };
    let t = run(&cfg).unwrap();
    let mut state = t.initial_ledger.clone();
    assert!(state.is_conserved());
    for c in &t.commits {
        state.replay(&c.events).unwrap();
        assert!(state.is_conserved());
        assert!(state.balances.values().all(|b| *b >= 0));
        assert!(c.live_locks.values().all(|n| *n <= cfg.rules.max_locks));
    }
    for agent in t.snapshots[0].agents.keys() {
        let series: Vec<_> = t.snapshots.iter().map(|s| s.agents[agent].clone()).collect();
        for w in series.windows(2) {
            assert!(w[1].cum_collected >= w[0].cum_collected);
            assert!(w[1].cum_locks >= w[0].cum_locks);
            assert!(w[1].cum_bounties_made >= w[0].cum_bounties_made);
        }
    }
}

#[test]
fn lone_skilled_agent_empties_escrow() {
    let cfg = SimConfig {
        agents: vec![AgentPolicy::new("Solo", Strategy::Competitor, 2.0, 0.0)],
        initial: InitialMarket::Source(
            "(* SUPPLY: 1000 *)\n(* BALANCE: Solo 500 *)\n\n(* ESTIMATE: lines=10 difficulty=2 usd=100 *)\n(* BOUNTY: 100 *)\nTheorem only : P.\nAdmitted.\n"
                .into(),
        ),
        horizon_hours: 12,
        ..SimConfig::default()
    };
    let t = run(&cfg).unwrap();
    assert!(t.final_ledger.open_bounties.is_empty());
    assert_eq!(t.final_ledger.escrow(), 0);
    // lock fee 10 paid, bounty 100 collected
    assert_eq!(t.final_ledger.balance(&"Solo".parse().unwrap()), Some(590));
}

#[test]
fn sniper_takes_the_unlocked_near_complete_proof() {
    let mut proof = String::new();
    for k in 0..40 {
        proof.push_str(&format!("  apply long_step_{k}.\n"));
    }
    let src = format!(
        "(* SUPPLY: 2000 *)\n(* BALANCE: Bob 500 *)\n(* BALANCE: Alice 500 *)\n\n\
         (* ESTIMATE: lines=400 difficulty=9 usd=9000 *)\n(* BOUNTY: 300 *)\nTheorem ex68_3 : forall g, torsion_free g.\n{proof}Admitted.\n"
    );
    let cfg = SimConfig {
        agents: vec![
            AgentPolicy::new("Bob", Strategy::Collaborator, 0.01, 0.0),
            AgentPolicy::new("Alice", Strategy::Sniper, 2.0, 0.0),
        ],
        initial: InitialMarket::Source(src),
        horizon_hours: 4,
        ..SimConfig::default()
    };
    let t = run(&cfg).unwrap();
    let collect = t.events().into_iter().find(|e| e.kind == proofmarket_core::ledger::EventKind::Collect).unwrap();
    assert_eq!(collect.agent.to_string(), "Alice");
    assert_eq!(t.final_ledger.balance(&"Bob".parse().unwrap()), Some(500));
    assert_eq!(t.final_ledger.balance(&"Alice".parse().unwrap()), Some(800));
}

#[test]
fn mistaken_claims_are_rejected() {
    let cfg = SimConfig { seed: 5, horizon_hours: 12, mistake_rate: 0.3, ..SimConfig::default() };
    let t = run(&cfg).unwrap();
    assert!(!t.rejections.is_empty());
    revalidate(&cfg, &t);
}

#[test]
fn lock_cap_and_fee_shape_locking() {
    let base = SimConfig { horizon_hours: 24, ..SimConfig::default() };
    let capped = SimConfig { rules: Rules { max_locks: 1, ..Rules::default() }, ..base.clone() };
    let pricey = SimConfig { rules: Rules { lock_fee_percent: 100, ..Rules::default() }, ..base.clone() };
    let rows = sweep(&[("cap10".into(), base), ("cap1".into(), capped), ("fee100".into(), pricey)]).unwrap();
    assert!(rows[1].max_live_locks <= 1);
    assert!(rows[0].max_live_locks >= rows[1].max_live_locks);
    assert_eq!(rows[2].locks_placed, 0);
}

#[test]
fn lifecycle_partition_holds_across_seeds() {
    for seed in 0..10 {
        let cfg = SimConfig { seed, horizon_hours: 12, ..SimConfig::default() };
        let t = run(&cfg).unwrap();
        let r = lifecycle_report(&t.events());
        assert!(r.is_partition(), "seed {seed}: {r:?}");
        let last = DevFile::from_source(t.revisions.last().unwrap()).unwrap();
        let stated = LedgerState::from_devfile(&last, cfg.rules.clone());
        assert_eq!(stated.balances, t.final_ledger.balances, "seed {seed}");
    }
}
