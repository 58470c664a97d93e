//! Norm state tables and formula evaluation.
//!
//! Every state other than `created` is a conjunction involving the created
//! formula. On top of the declared states each norm kind gets its standard
//! derived states:
//!
//! | kind          | derived                                                  |
//! |---------------|----------------------------------------------------------|
//! | commitment    | violated = C∧D∧¬S, expired = C∧¬D∧late(D) or false       |
//! | prohibition   | satisfied = C∧¬V                                         |
//! | authorization | violated = C∧D∧¬S (∧ late(S) when S has an upper bound)  |
//!
//! Cross-norm references are then inlined under the role/parameter renaming
//! written at the use site, so a table's formulas only mention events.

mod derive;
mod eval;
mod inline;

use indexmap::IndexMap;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

pub use derive::{derive_states, positive_labels, upper_bound};
pub use eval::{evaluate, evaluate_counted};
pub use inline::{build_tables, inline_refs};

use crate::dsl::{Formula, NormKind, NormSpec, TimeArith};
use crate::ledger::{HistoryDoc, Scalar};
use crate::Time;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("cyclic norm reference: {}", .0.join(" -> "))]
    CyclicNormReference(Vec<String>),
    #[error("unknown norm state `{0}:{1}`")]
    UnknownState(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateEntry {
    pub formula: Formula,
    /// Upper time bound whose passing this state waits for, if any.
    pub deadline: Option<TimeArith>,
    /// Added by the norm kind rather than written in the specification.
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormStateTable {
    pub norm: String,
    pub kind: NormKind,
    pub expectee: String,
    pub expector: String,
    pub params: Vec<String>,
    /// Full formula for every state, declared first, then derived.
    pub states: IndexMap<String, StateEntry>,
    /// Declared formulas as written (after inlining), without the `created`
    /// conjunct. Used to render the verbatim view bodies.
    pub declared: IndexMap<String, Formula>,
}

impl NormStateTable {
    pub fn state(&self, name: &str) -> Option<&Formula> {
        self.states.get(name).map(|s| &s.formula)
    }

    pub fn state_names(&self) -> impl Iterator<Item = &str> {
        self.states.keys().map(String::as_str)
    }

    pub(crate) fn header(spec: &NormSpec) -> (String, String, Vec<String>) {
        (
            spec.expectee.clone(),
            spec.expector.clone(),
            spec.params.clone(),
        )
    }
}

/// Variable assignments produced by a successful evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub times: BTreeMap<String, Time>,
    pub roles: BTreeMap<String, Scalar>,
    pub params: BTreeMap<String, Scalar>,
}

impl Binding {
    pub fn is_empty(&self) -> bool {
        self.times.is_empty() && self.roles.is_empty() && self.params.is_empty()
    }

    /// Adds the norm instance's role and parameter values, read from the
    /// document's top-level attributes.
    pub fn instantiate(mut self, roles: &[String], params: &[String], doc: &HistoryDoc) -> Binding {
        for role in roles {
            if let Some(v) = doc.attr(role) {
                self.roles.insert(role.clone(), v.clone());
            }
        }
        for p in params {
            if let Some(v) = doc.attr(p) {
                self.params.insert(p.clone(), v.clone());
            }
        }
        self
    }
}

/// Which clock value evaluation uses for a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NowPolicy {
    /// Latest event time in the document (0 when it has none).
    #[default]
    DocMax,
    /// Latest event time plus a fixed offset.
    DocMaxPlus(Time),
    Fixed(Time),
}

impl NowPolicy {
    pub fn at(self, doc: &HistoryDoc) -> Time {
        match self {
            NowPolicy::DocMax => doc.max_time().unwrap_or(0),
            NowPolicy::DocMaxPlus(k) => doc.max_time().unwrap_or(0) + k,
            NowPolicy::Fixed(t) => t,
        }
    }
}
