#![allow(dead_code)]

pub mod ast;
pub mod ledger;
pub mod norm;

use compact_core::dsl::{parse_compact, resolve};
use compact_core::ledger::{EventRecord, HistoryDoc, Scalar, Store};
use compact_core::norm::{build_tables, NormStateTable};
use compact_core::Time;
use indexmap::IndexMap;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PRIVACY: &str = include_str!("../../fixtures/privacy.hrc");

/// Proptest config with a fixed seed and no failure files.
pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x00c0_ffee),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn privacy() -> Vec<NormStateTable> {
    build_tables(&resolve(parse_compact(PRIVACY, "privacy").unwrap()).unwrap()).unwrap()
}

pub fn sample_doc() -> HistoryDoc {
    let v = serde_json::from_str(include_str!("../../fixtures/history_7c4f.json")).unwrap();
    HistoryDoc::from_json(&v).unwrap()
}

/// Every event the privacy compact mentions.
pub const EVENTS: [&str; 9] = [
    "Visit",
    "Record",
    "Store",
    "GrantAccess",
    "RevokeAccess",
    "RequestAccess",
    "Shared",
    "RequestDeletion",
    "Deleted",
];
pub const ROLES: [&str; 4] = ["patient", "physician", "hospital", "recipient"];
pub const AGENTS: [&str; 5] = ["P", "D", "H", "R", "X"];
pub const ATTRS: [&str; 4] = ["date", "patient", "item", "recipient"];

/// Documents built directly, without ledger checks: any subset of the
/// privacy events, times in a small range so bounds and intervals are
/// exercised, mostly-correct roles and random attribute subsets.
pub fn arb_doc() -> impl Strategy<Value = HistoryDoc> {
    let event = (any::<bool>(), 0..16i64, 0..AGENTS.len(), 0u8..16);
    (
        prop::collection::vec(event, EVENTS.len()),
        prop::collection::vec(prop::bool::weighted(0.85), ROLES.len()),
        0u32..1000,
    )
        .prop_map(|(events, honest, n)| doc_from_parts(&format!("doc{n}"), &events, &honest))
}

fn doc_from_parts(id: &str, events: &[(bool, Time, usize, u8)], honest: &[bool]) -> HistoryDoc {
    let mut doc = HistoryDoc::new(id);
    for (i, role) in ROLES.iter().enumerate() {
        let agent = if honest[i] { AGENTS[i] } else { "X" };
        doc.attrs.insert(role.to_string(), agent.into());
    }
    doc.attrs.insert("item".into(), "I".into());
    for (i, &(present, time, by, mask)) in events.iter().enumerate() {
        if !present {
            continue;
        }
        let mut ev = EventRecord::new(EVENTS[i], AGENTS[by], time);
        for (b, a) in ATTRS.iter().enumerate() {
            if mask & (1 << b) != 0 {
                ev = ev.with(*a, "v");
            }
        }
        doc.events.insert(EVENTS[i].into(), ev);
    }
    doc
}

pub fn roles() -> IndexMap<String, Scalar> {
    ROLES
        .iter()
        .zip(AGENTS)
        .map(|(r, a)| (r.to_string(), Scalar::from(a)))
        .collect()
}

/// The privacy event `name` reported by its expected role with the
/// attributes the compact checks.
pub fn canonical_event(name: &str, time: Time) -> EventRecord {
    let (by, attrs): (&str, &[&str]) = match name {
        "Visit" => ("P", &["date"]),
        "Record" => ("D", &["patient", "item"]),
        "Store" => ("H", &["patient", "item"]),
        "GrantAccess" | "RevokeAccess" => ("P", &["recipient", "item"]),
        "RequestAccess" => ("R", &["item"]),
        "Shared" => ("H", &["item", "recipient"]),
        "RequestDeletion" => ("P", &["item"]),
        "Deleted" => ("H", &["item"]),
        _ => panic!("unknown event {name}"),
    };
    let mut ev = EventRecord::new(name, by, time);
    for a in attrs {
        let value = match *a {
            "patient" => "P",
            "recipient" => "R",
            "date" => "2018-11-16",
            _ => "I",
        };
        ev = ev.with(*a, value);
    }
    ev
}

/// Random submission schedule: `steps` events spread over `histories`
/// histories, times increasing. Repeated event names are left in; the
/// ledger rejects them.
pub fn random_schedule(seed: u64, histories: usize, steps: usize) -> Vec<(String, EventRecord)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..steps)
        .map(|t| {
            let h = rng.gen_range(0..histories);
            let name = EVENTS[rng.gen_range(0..EVENTS.len())];
            (format!("h{h:04}"), canonical_event(name, t as Time + 1))
        })
        .collect()
}

pub fn store_with_histories(histories: usize) -> Store {
    let mut store = Store::new();
    for h in 0..histories {
        store
            .create_history(format!("h{h:04}"), roles(), IndexMap::new())
            .unwrap();
    }
    store
}

/// Role and attributes the compact expects on event `name`.
pub fn expected(name: &str) -> (&'static str, Vec<String>) {
    let ev = canonical_event(name, 0);
    let i = AGENTS.iter().position(|a| *a == ev.by).unwrap();
    (ROLES[i], ev.attrs.keys().cloned().collect())
}

/// Mostly well-formed documents with unconstrained times: each event is
/// present with its expected agent and attributes, now and then reported by
/// the wrong agent or missing an attribute.
pub fn arb_plausible_doc() -> impl Strategy<Value = HistoryDoc> {
    let event = (prop::bool::weighted(0.6), 0..16i64, prop::bool::weighted(0.1), prop::bool::weighted(0.1));
    (prop::collection::vec(event, EVENTS.len()), 0u32..1000).prop_map(|(events, n)| {
        let mut doc = HistoryDoc::new(format!("doc{n}"));
        doc.attrs = roles();
        doc.attrs.insert("item".into(), "I".into());
        for (i, (present, time, wrong_agent, drop_attr)) in events.into_iter().enumerate() {
            if !present {
                continue;
            }
            let mut ev = canonical_event(EVENTS[i], time);
            if wrong_agent {
                ev.by = "X".into();
            }
            if drop_attr {
                ev.attrs.pop();
            }
            doc.events.insert(EVENTS[i].into(), ev);
        }
        doc
    })
}

/// Either kind of random document.
pub fn any_doc() -> impl Strategy<Value = HistoryDoc> {
    prop_oneof![arb_doc(), arb_plausible_doc()]
}
