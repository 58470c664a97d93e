use std::collections::HashSet;

use indexmap::IndexMap;

use super::{NormStateTable, StateEntry};
use crate::dsl::{derived_state_names, CmpOp, Formula, NormKind, NormSpec, TimeAnnot, TimeArith, NOW};

/// Builds the full state table for one norm. Cross-norm references are left
/// in place; see [`super::inline_refs`].
pub fn derive_states(spec: &NormSpec) -> NormStateTable {
    let created = spec
        .state("created")
        .expect("resolved norms declare `created`")
        .clone();
    let declared_detached = spec.state("detached");
    let conj = |f: &Formula| Formula::and(created.clone(), f.clone());

    let mut states = IndexMap::new();
    let mut declared = IndexMap::new();
    for state in &spec.states {
        declared.insert(state.name.clone(), state.formula.clone());
        let formula = match (state.name.as_str(), spec.kind, declared_detached) {
            ("created", _, _) => created.clone(),
            ("discharged", NormKind::Authorization, Some(d)) => {
                Formula::and(conj(d), state.formula.clone())
            }
            _ => conj(&state.formula),
        };
        states.insert(
            state.name.clone(),
            StateEntry {
                formula,
                deadline: None,
                derived: false,
            },
        );
    }

    let created_labels = positive_labels(&created);
    for name in derived_state_names(spec) {
        let entry = match (spec.kind, name) {
            (NormKind::Commitment, "violated") | (NormKind::Authorization, "violated") => {
                let d = &declared["detached"];
                let s = &declared["discharged"];
                let base = Formula::and(conj(d), Formula::not(s.clone()));
                let deadline = match spec.kind {
                    NormKind::Authorization => {
                        let mut scope = created_labels.clone();
                        scope.extend(positive_labels(d));
                        upper_bound(s).filter(|b| bound_within(b, &scope))
                    }
                    _ => None,
                };
                match deadline {
                    Some(b) => StateEntry {
                        formula: Formula::and(base, Formula::Late(b.clone())),
                        deadline: Some(b),
                        derived: true,
                    },
                    None => StateEntry {
                        formula: base,
                        deadline: None,
                        derived: true,
                    },
                }
            }
            (NormKind::Commitment, "expired") => {
                let d = &declared["detached"];
                match upper_bound(d).filter(|b| bound_within(b, &created_labels)) {
                    Some(b) => StateEntry {
                        formula: Formula::and(
                            Formula::and(created.clone(), Formula::not(d.clone())),
                            Formula::Late(b.clone()),
                        ),
                        deadline: Some(b),
                        derived: true,
                    },
                    None => StateEntry {
                        formula: Formula::Const(false),
                        deadline: None,
                        derived: true,
                    },
                }
            }
            (NormKind::Prohibition, "satisfied") => StateEntry {
                formula: Formula::and(created.clone(), Formula::not(declared["violated"].clone())),
                deadline: None,
                derived: true,
            },
            _ => unreachable!("no derivation for {} {name}", spec.kind),
        };
        states.insert(name.to_string(), entry);
    }

    let (expectee, expector, params) = NormStateTable::header(spec);
    NormStateTable {
        norm: spec.name.clone(),
        kind: spec.kind,
        expectee,
        expector,
        params,
        states,
        declared,
    }
}

fn bound_within(bound: &TimeArith, scope: &HashSet<String>) -> bool {
    match bound.var() {
        None => true,
        Some(v) => v != NOW && scope.contains(v),
    }
}

/// Time variables a formula binds whenever it holds.
pub fn positive_labels(f: &Formula) -> HashSet<String> {
    match f {
        Formula::Event(e) => e
            .time
            .as_ref()
            .and_then(TimeAnnot::bound_var)
            .map(|v| HashSet::from([v.to_string()]))
            .unwrap_or_default(),
        Formula::And(l, r) => {
            let mut s = positive_labels(l);
            s.extend(positive_labels(r));
            s
        }
        Formula::Or(l, r) => {
            let r = positive_labels(r);
            positive_labels(l).into_iter().filter(|v| r.contains(v)).collect()
        }
        Formula::Except(body, _) => positive_labels(body),
        Formula::Not(_) | Formula::Ref(_) | Formula::Late(_) | Formula::Const(_) => HashSet::new(),
    }
}

/// Latest admissible time for the first upper-bounded event atom in a
/// positive position: an interval's upper end, or the right-hand side of a
/// `<`/`<=` comparison.
pub fn upper_bound(f: &Formula) -> Option<TimeArith> {
    match f {
        Formula::Event(e) => match &e.time {
            Some(TimeAnnot::Interval { hi, .. }) => Some(hi.clone()),
            Some(TimeAnnot::Compare { op: CmpOp::Le, rhs, .. }) => Some(rhs.clone()),
            Some(TimeAnnot::Compare { op: CmpOp::Lt, rhs, .. }) => Some(rhs.shifted(-1)),
            _ => None,
        },
        Formula::And(l, r) => upper_bound(l).or_else(|| upper_bound(r)),
        Formula::Except(body, _) => upper_bound(body),
        _ => None,
    }
}
