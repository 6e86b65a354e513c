//! Marketplace kernel, revision guard and simulator for bounty-driven
//! collaborative formal developments.
//!
//! A development lives in one file. Agents earn tokens by proving statements
//! that carry bounties, can lock a bounty for 24 hours by paying 10% of it,
//! and may fund sub-bounties on lemmas they introduce. Every proposed
//! revision of the file is checked by [`guard::check_revision`] against its
//! predecessor before it may be committed.
//!
//! - [`devfile`]: stream tokenizer and parser for the file format.
//! - [`ledger`]: the economy state machine.
//! - [`guard`]: revision validation, plus the first-generation line checker.
//! - [`depgraph`]: dependency closure and `Qed` gating.
//! - [`sim`]: seeded multi-agent simulation.
//! - [`metrics`]: time series and summary figures.

pub mod depgraph;
pub mod devfile;
pub mod fixtures;
pub mod guard;
pub mod ledger;
pub mod metrics;
pub mod sim;
pub mod time;
