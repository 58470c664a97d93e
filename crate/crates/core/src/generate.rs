//! Seeded random enactments of the privacy compact.
//!
//! Each history follows a prefix of one canonical event sequence. The prefix
//! length is uniform over `0..=8`, so histories that got as far as `Visit`
//! far outnumber those that reached `Shared`.
//!
//! | # | event           | by        | attributes          | gap after previous |
//! |---|-----------------|-----------|---------------------|--------------------|
//! | 1 | Visit           | patient   | date                | starts at 1        |
//! | 2 | Record          | physician | patient, item       | 1..=3              |
//! | 3 | Store           | hospital  | patient, item       | 1..=3              |
//! | 4 | GrantAccess     | patient   | recipient, item     | 1..=3              |
//! |   | RevokeAccess    | patient   | recipient, item     | 1..=3, p = 0.1     |
//! | 5 | RequestAccess   | recipient | item                | 1..=3              |
//! | 6 | Shared          | hospital  | item, recipient     | 1..=15             |
//! | 7 | RequestDeletion | patient   | item                | 1..=3              |
//! | 8 | Deleted         | hospital  | item                | 1..=3              |
//!
//! `RevokeAccess` is not counted in the depth; it only rides along after
//! `GrantAccess`. Role holders and items are fresh per history.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ledger::{EventRecord, Scalar, Store};
use crate::Time;

pub const CANONICAL: [&str; 8] = [
    "Visit",
    "Record",
    "Store",
    "GrantAccess",
    "RequestAccess",
    "Shared",
    "RequestDeletion",
    "Deleted",
];

pub const REVOKE_PROBABILITY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub count: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            count: 20_000,
            seed: 0,
        }
    }
}

/// Builds a fresh store holding `config.count` histories.
pub fn generate_store(config: &GeneratorConfig) -> Store {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut store = Store::new();
    for n in 0..config.count {
        let id = format!("{:032x}", rng.gen::<u128>());
        let depth = rng.gen_range(0..=CANONICAL.len());
        enact(&mut store, &mut rng, &id, n, depth);
    }
    store
}

fn enact(store: &mut Store, rng: &mut ChaCha8Rng, id: &str, n: usize, depth: usize) {
    let patient = format!("patient{n}");
    let physician = format!("physician{}", rng.gen_range(0..50));
    let hospital = format!("hospital{}", rng.gen_range(0..10));
    let recipient = format!("recipient{}", rng.gen_range(0..200));
    let item = format!("item{n}");
    let date = format!("2018-{:02}-{:02}", rng.gen_range(1..=12), rng.gen_range(1..=28));

    let roles: IndexMap<String, Scalar> = [
        ("patient", &patient),
        ("physician", &physician),
        ("hospital", &hospital),
        ("recipient", &recipient),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), Scalar::from(v.as_str())))
    .collect();
    let attrs = IndexMap::from([("item".to_string(), Scalar::from(item.as_str()))]);
    store
        .create_history(id, roles, attrs)
        .expect("generated ids are unique");

    let mut time: Time = 0;
    let submit = |store: &mut Store, ev: EventRecord| {
        store.submit_event(id, ev).expect("generated events are consistent");
    };
    for (i, name) in CANONICAL.iter().take(depth).enumerate() {
        time += match *name {
            _ if i == 0 => 1,
            "Shared" => rng.gen_range(1..=15),
            _ => rng.gen_range(1..=3),
        };
        let ev = match *name {
            "Visit" => EventRecord::new("Visit", &*patient, time).with("date", &*date),
            "Record" => EventRecord::new("Record", &*physician, time)
                .with("patient", &*patient)
                .with("item", &*item),
            "Store" => EventRecord::new("Store", &*hospital, time)
                .with("patient", &*patient)
                .with("item", &*item),
            "GrantAccess" => EventRecord::new("GrantAccess", &*patient, time)
                .with("recipient", &*recipient)
                .with("item", &*item),
            "RequestAccess" => EventRecord::new("RequestAccess", &*recipient, time).with("item", &*item),
            "Shared" => EventRecord::new("Shared", &*hospital, time)
                .with("item", &*item)
                .with("recipient", &*recipient),
            "RequestDeletion" => EventRecord::new("RequestDeletion", &*patient, time).with("item", &*item),
            "Deleted" => EventRecord::new("Deleted", &*hospital, time).with("item", &*item),
            _ => unreachable!(),
        };
        submit(store, ev);
        if *name == "GrantAccess" && rng.gen_bool(REVOKE_PROBABILITY) {
            time += rng.gen_range(1..=3);
            submit(
                store,
                EventRecord::new("RevokeAccess", &*patient, time)
                    .with("recipient", &*recipient)
                    .with("item", &*item),
            );
        }
    }
}
