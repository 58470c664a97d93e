//! Per-state views and their materialized collections.
//!
//! A view re-evaluates whole documents, the way a CouchDB map function
//! does: each refresh reads the change feed past the collection's position,
//! collapses it to the distinct histories touched, and evaluates the state
//! predicate once per history.

mod oracle;
mod throughput;

use std::collections::BTreeMap;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use oracle::oracle_evaluate;
pub use throughput::{measure_throughput, ThroughputStats};

use crate::dsl::Formula;
use crate::ledger::{HistoryDoc, Store};
use crate::norm::{evaluate_counted, Binding, NormStateTable, NowPolicy};
use crate::Time;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViewError {
    #[error("unknown norm `{0}`")]
    UnknownNorm(String),
    #[error("norm `{norm}` has no state `{state}`")]
    UnknownState { norm: String, state: String },
}

/// Compiled predicate for one state of one norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDef {
    pub norm: String,
    pub state: String,
    pub predicate: Formula,
    /// Expectee and expector, read off each matching doc into the row.
    pub roles: [String; 2],
    /// Header parameters, then any other attribute the predicate mentions.
    pub params: Vec<String>,
}

impl ViewDef {
    /// Evaluates the predicate on one document; `Some` carries the row
    /// binding when the document belongs in the view.
    pub fn matches(&self, doc: &HistoryDoc, now: Time, atoms: &mut u64) -> Option<Binding> {
        let (ok, binding) = evaluate_counted(&self.predicate, doc, now, atoms);
        ok.then(|| binding.instantiate(&self.roles, &self.params, doc))
    }
}

/// One view per state, declared states first.
pub fn compile_views(table: &NormStateTable) -> Vec<ViewDef> {
    table
        .states
        .iter()
        .map(|(state, entry)| {
            let roles = [table.expectee.clone(), table.expector.clone()];
            let mut params = table.params.clone();
            entry.formula.visit(&mut |f| {
                if let Formula::Event(e) = f {
                    for a in &e.attrs {
                        if !params.contains(a) && !roles.contains(a) {
                            params.push(a.clone());
                        }
                    }
                }
            });
            ViewDef {
                norm: table.norm.clone(),
                state: state.clone(),
                predicate: entry.formula.clone(),
                roles,
                params,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    #[serde(rename = "historyId")]
    pub history_id: String,
    pub binding: Binding,
    /// Document version the row was computed from.
    #[serde(skip)]
    pub seq: u64,
}

/// What one refresh did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RefreshStats {
    /// Feed entries consumed.
    pub changes: usize,
    /// Distinct documents re-evaluated.
    pub evaluated: usize,
    /// Predicate atoms checked.
    pub atoms: u64,
}

#[derive(Debug, Clone)]
pub struct ViewCollection {
    pub view: ViewDef,
    pub now: NowPolicy,
    rows: BTreeMap<String, Row>,
    last_seq: u64,
}

impl ViewCollection {
    pub fn new(view: ViewDef, now: NowPolicy) -> Self {
        ViewCollection {
            view,
            now,
            rows: BTreeMap::new(),
            last_seq: 0,
        }
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    /// Rows sorted by history id.
    pub fn rows(&self) -> impl ExactSizeIterator<Item = &Row> {
        self.rows.values()
    }

    pub fn contains(&self, history_id: &str) -> bool {
        self.rows.contains_key(history_id)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.rows.keys().map(String::as_str).collect()
    }

    /// Brings the collection up to the store's latest change.
    pub fn refresh(&mut self, store: &Store) -> RefreshStats {
        self.refresh_batched(store, usize::MAX, None)
    }

    /// Like [`refresh`](Self::refresh), evaluating documents `batch` at a
    /// time, in parallel on `pool` when one is given.
    pub fn refresh_batched(
        &mut self,
        store: &Store,
        batch: usize,
        pool: Option<&rayon::ThreadPool>,
    ) -> RefreshStats {
        let changes = store.changes_since(self.last_seq);
        let mut touched: IndexMap<&str, ()> = IndexMap::new();
        for c in &changes {
            touched.insert(c.history_id.as_str(), ());
        }
        let ids: Vec<&str> = touched.into_keys().collect();
        let mut stats = RefreshStats {
            changes: changes.len(),
            evaluated: ids.len(),
            atoms: 0,
        };

        let eval = |id: &str| -> (String, Option<Row>, u64) {
            let doc = store.get(id).expect("feed only names stored histories");
            let mut atoms = 0;
            let row = self
                .view
                .matches(doc, self.now.at(doc), &mut atoms)
                .map(|binding| Row {
                    history_id: id.to_string(),
                    binding,
                    seq: doc.seq,
                });
            (id.to_string(), row, atoms)
        };
        let mut results = Vec::with_capacity(ids.len());
        for chunk in ids.chunks(batch.max(1)) {
            match pool {
                Some(pool) => {
                    results.extend(pool.install(|| chunk.par_iter().map(|id| eval(id)).collect::<Vec<_>>()))
                }
                None => results.extend(chunk.iter().map(|id| eval(id))),
            }
        }

        for (id, row, atoms) in results {
            stats.atoms += atoms;
            match row {
                Some(row) => {
                    self.rows.insert(id, row);
                }
                None => {
                    self.rows.remove(&id);
                }
            }
        }
        self.last_seq = store.last_seq();
        stats
    }
}

/// All views of a compact with their collections, refreshed on query.
#[derive(Debug)]
pub struct ViewEngine {
    collections: IndexMap<(String, String), ViewCollection>,
    pool: Option<rayon::ThreadPool>,
}

impl ViewEngine {
    pub fn new(tables: &[NormStateTable], now: NowPolicy) -> Self {
        let collections = tables
            .iter()
            .flat_map(compile_views)
            .map(|v| ((v.norm.clone(), v.state.clone()), ViewCollection::new(v, now)))
            .collect();
        ViewEngine {
            collections,
            pool: None,
        }
    }

    /// Evaluates documents on `threads` workers during refresh (1 = inline).
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.pool = (threads > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool")
        });
        self
    }

    pub fn views(&self) -> impl Iterator<Item = &ViewDef> {
        self.collections.values().map(|c| &c.view)
    }

    pub fn collection(&self, norm: &str, state: &str) -> Option<&ViewCollection> {
        self.collections.get(&(norm.to_string(), state.to_string()))
    }

    pub fn refresh_all(&mut self, store: &Store) -> RefreshStats {
        let mut total = RefreshStats::default();
        for c in self.collections.values_mut() {
            let s = c.refresh_batched(store, usize::MAX, self.pool.as_ref());
            total.changes += s.changes;
            total.evaluated += s.evaluated;
            total.atoms += s.atoms;
        }
        total
    }

    /// Current rows of `norm.state`, sorted by history id.
    ///
    /// With `now` given, states whose predicate mentions `now` are
    /// recomputed over every document at that time; other states do not
    /// depend on the clock and come from the materialized collection.
    pub fn query(
        &mut self,
        store: &Store,
        norm: &str,
        state: &str,
        now: Option<Time>,
    ) -> Result<Vec<Row>, ViewError> {
        let key = (norm.to_string(), state.to_string());
        let Some(coll) = self.collections.get_mut(&key) else {
            return Err(if self.collections.keys().any(|(n, _)| n == norm) {
                ViewError::UnknownState {
                    norm: norm.into(),
                    state: state.into(),
                }
            } else {
                ViewError::UnknownNorm(norm.into())
            });
        };
        match now {
            Some(t) if coll.view.predicate.uses_now() => {
                let mut scratch = ViewCollection::new(coll.view.clone(), NowPolicy::Fixed(t));
                scratch.refresh_batched(store, usize::MAX, self.pool.as_ref());
                Ok(scratch.rows().cloned().collect())
            }
            _ => {
                coll.refresh_batched(store, usize::MAX, self.pool.as_ref());
                Ok(coll.rows().cloned().collect())
            }
        }
    }
}
