use compact_core::ledger::{EventRecord, HistoryDoc, LogRecord, Scalar, Store};
use indexmap::IndexMap;
use proptest::prelude::*;

/// One attempted change. Many are invalid on purpose (unknown history,
/// repeated event name, stale time, clashing attribute value); those must be
/// rejected without touching the store.
#[derive(Debug, Clone)]
pub enum Op {
    Create { h: u8, attrs: Vec<(u8, u8)> },
    Submit { h: u8, name: u8, by: u8, time: i64, attrs: Vec<(u8, u8)> },
}

const KEYS: [&str; 4] = ["patient", "item", "recipient", "date"];
const VALUES: [&str; 3] = ["a", "b", "c"];

pub fn op() -> impl Strategy<Value = Op> {
    let attrs = prop::collection::vec((0u8..4, 0u8..3), 0..3);
    prop_oneof![
        1 => (0u8..5, attrs.clone()).prop_map(|(h, attrs)| Op::Create { h, attrs }),
        4 => (0u8..5, 0u8..6, 0u8..3, 0i64..30, attrs)
            .prop_map(|(h, name, by, time, attrs)| Op::Submit { h, name, by, time, attrs }),
    ]
}

pub fn attr_map(pairs: &[(u8, u8)]) -> IndexMap<String, Scalar> {
    pairs
        .iter()
        .map(|&(k, v)| (KEYS[k as usize].to_string(), Scalar::from(VALUES[v as usize])))
        .collect()
}

/// Applies `op`, ignoring rejections.
pub fn apply(store: &mut Store, op: &Op) -> bool {
    match op {
        Op::Create { h, attrs } => store
            .create_history(format!("h{h}"), IndexMap::new(), attr_map(attrs))
            .is_ok(),
        Op::Submit { h, name, by, time, attrs } => {
            let mut ev = EventRecord::new(format!("E{name}"), VALUES[*by as usize], *time);
            ev.attrs = attr_map(attrs);
            store.submit_event(&format!("h{h}"), ev).is_ok()
        }
    }
}

/// Runs `ops` on a fresh store, keeping a snapshot of every document
/// before each one.
pub fn run(ops: &[Op]) -> (Store, Vec<Vec<HistoryDoc>>) {
    let mut store = Store::new();
    let mut snapshots = Vec::new();
    for op in ops {
        snapshots.push(store.docs().cloned().collect());
        let before = store.to_log_string();
        if !apply(&mut store, op) {
            assert_eq!(store.to_log_string(), before, "rejected change left a trace");
        }
    }
    (store, snapshots)
}

pub fn append_only(ops: &[Op]) -> Result<(), TestCaseError> {
    let (store, snapshots) = run(ops);
    for snap in &snapshots {
        for old in snap {
            let new = store.get(&old.id).expect("history vanished");
            for (k, v) in &old.attrs {
                prop_assert_eq!(new.attrs.get(k), Some(v));
            }
            for (name, ev) in &old.events {
                prop_assert_eq!(new.events.get(name), Some(ev));
            }
            prop_assert!(new.seq >= old.seq);
        }
    }
    Ok(())
}

pub fn promotion_soundness(ops: &[Op]) -> Result<(), TestCaseError> {
    let (store, _) = run(ops);
    for doc in store.docs() {
        for ev in doc.events.values() {
            for (k, v) in &ev.attrs {
                prop_assert_eq!(doc.attrs.get(k), Some(v), "{}.{}", ev.name, k);
            }
        }
    }
    Ok(())
}

pub fn replay_determinism(ops: &[Op]) -> Result<(), TestCaseError> {
    let (store, _) = run(ops);
    let replayed = Store::replay(store.log()).unwrap();
    prop_assert_eq!(replayed.to_log_string(), store.to_log_string());
    prop_assert_eq!(
        replayed.docs().cloned().collect::<Vec<_>>(),
        store.docs().cloned().collect::<Vec<_>>()
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.jsonl");
    store.persist(&path).unwrap();
    let loaded = Store::load(&path).unwrap();
    let again = dir.path().join("again.jsonl");
    loaded.persist(&again).unwrap();
    prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());

    // The feed itself replays to the same thing, record by record.
    let records: Vec<LogRecord> = (1..=store.last_seq()).map(|s| store.change(s).unwrap().clone()).collect();
    prop_assert_eq!(Store::replay(&records).unwrap().to_log_string(), store.to_log_string());
    Ok(())
}
