use super::{privacy, ATTRS};
use compact_core::dsl::{Formula, NormKind};
use compact_core::ledger::{EventRecord, HistoryDoc};
use compact_core::norm::evaluate;
use compact_core::Time;
use proptest::prelude::*;

pub fn with_event(doc: &HistoryDoc, name: &str, by: &str, time: Time, attrs: u8) -> HistoryDoc {
    let mut doc = doc.clone();
    let mut ev = EventRecord::new(name, by, time);
    for (b, a) in ATTRS.iter().enumerate() {
        if attrs & (1 << b) != 0 {
            ev = ev.with(*a, "v");
        }
    }
    doc.events.insert(name.into(), ev);
    doc
}

fn is_positive(f: &Formula) -> bool {
    let mut ok = true;
    f.visit(&mut |g| ok &= !matches!(g, Formula::Except(..) | Formula::Not(..)));
    ok
}

/// No state holds unless `created` does.
pub fn conjunction_closure(doc: &HistoryDoc, now: Time) -> Result<(), TestCaseError> {
    for t in privacy() {
        let created = evaluate(t.state("created").unwrap(), doc, now).0;
        for (state, entry) in &t.states {
            if evaluate(&entry.formula, doc, now).0 {
                prop_assert!(created, "{}.{} without created", t.norm, state);
            }
        }
    }
    Ok(())
}

/// A commitment is never both discharged and violated.
pub fn discharged_excludes_violated(doc: &HistoryDoc, now: Time) -> Result<(), TestCaseError> {
    for t in privacy().iter().filter(|t| t.kind == NormKind::Commitment) {
        let d = evaluate(t.state("discharged").unwrap(), doc, now).0;
        let v = evaluate(t.state("violated").unwrap(), doc, now).0;
        prop_assert!(!(d && v), "{}", t.norm);
    }
    Ok(())
}

/// Adding an event never falsifies a state free of negation.
pub fn monotone(doc: &HistoryDoc, added: &EventRecord, now: Time) -> Result<(), TestCaseError> {
    if doc.event(&added.name).is_some() {
        return Ok(());
    }
    let mut bigger = doc.clone();
    bigger.events.insert(added.name.clone(), added.clone());
    for t in privacy() {
        for (state, entry) in &t.states {
            if is_positive(&entry.formula) && evaluate(&entry.formula, doc, now).0 {
                prop_assert!(evaluate(&entry.formula, &bigger, now).0, "{}.{}", t.norm, state);
            }
        }
    }
    Ok(())
}
