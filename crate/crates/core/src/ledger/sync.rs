use super::{Account, EventKind, LedgerError, LedgerState, MarketEvent, Rules};
use crate::devfile::{Annotation, AnnotationKind, DevFile};

/// Replay `events` on the ledger a development states and write the result
/// back into it: header balances plus the bounty, lock and collection
/// annotations of the affected items. Returns the final ledger.
pub fn apply_to_devfile(file: &mut DevFile, events: &[MarketEvent], rules: Rules) -> Result<LedgerState, (usize, LedgerError)> {
    let mut state = LedgerState::from_devfile(file, rules);
    for (i, e) in events.iter().enumerate() {
        let placed_lock = e.item.as_deref().and_then(|it| state.locks.get(it).cloned());
        state.apply(e).map_err(|err| (i, err))?;
        let Some(name) = e.item.as_deref() else { continue };
        let missing = || (i, LedgerError::BadEvent { line: i + 1, reason: format!("no item `{name}` in the development") });
        if e.kind == EventKind::MarkProved || e.kind == EventKind::AdminAdjust {
            continue;
        }
        let item = file.item_mut(name).ok_or_else(missing)?;
        let drop_locks = |item: &mut crate::devfile::Item| item.annotations.retain(|a| !matches!(a.kind, AnnotationKind::Lock { .. }));
        match e.kind {
            EventKind::PlaceBounty | EventKind::PlaceSubBounty => {
                let kind = match &e.agent {
                    Account::Admin => AnnotationKind::Bounty { amount: e.amount },
                    Account::Agent(a) => AnnotationKind::SubBounty { creator: a.clone(), amount: e.amount },
                };
                item.annotations.insert(0, Annotation::new(kind));
            }
            EventKind::Lock => {
                drop_locks(item);
                let lock = &state.locks[name];
                item.annotations.push(Annotation::new(AnnotationKind::Lock { agent: lock.holder.clone(), expires: lock.expires }));
            }
            EventKind::RemoveExpiredLock => {
                if placed_lock.is_some() && !state.locks.contains_key(name) {
                    drop_locks(item);
                }
            }
            EventKind::Collect => {
                drop_locks(item);
                let paid = state.collected.last().expect("collect records a collection");
                item.annotations.push(Annotation::new(AnnotationKind::Collected { agent: paid.agent.clone(), amount: paid.amount }));
            }
            EventKind::RemoveBounty => {
                drop_locks(item);
                item.annotations.retain(|a| !matches!(a.kind, AnnotationKind::Bounty { .. } | AnnotationKind::SubBounty { .. }));
            }
            EventKind::MarkProved | EventKind::AdminAdjust => {}
        }
    }
    state.write_header(file);
    Ok(state)
}
