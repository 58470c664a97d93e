use std::collections::HashMap;

use super::{derive_states, NormError, NormStateTable};
use crate::dsl::{Formula, RefBinding, ResolvedCompact, NOW};

/// Derives and inlines the state table of every norm, in declaration order.
pub fn build_tables(compact: &ResolvedCompact) -> Result<Vec<NormStateTable>, NormError> {
    let mut inliner = Inliner::new(compact);
    compact
        .norms()
        .iter()
        .map(|n| inliner.table(derive_states(n)))
        .collect()
}

/// Replaces every cross-norm reference in `table` with the referenced
/// state's formula, renamed to the use site's roles and parameters. Time
/// variables of inlined formulas are freshened so they cannot capture the
/// referencing norm's variables.
pub fn inline_refs(
    table: NormStateTable,
    compact: &ResolvedCompact,
) -> Result<NormStateTable, NormError> {
    Inliner::new(compact).table(table)
}

struct Inliner<'c> {
    compact: &'c ResolvedCompact,
    raw: HashMap<String, NormStateTable>,
    done: HashMap<(String, String), Formula>,
    stack: Vec<(String, String)>,
    fresh: usize,
}

impl<'c> Inliner<'c> {
    fn new(compact: &'c ResolvedCompact) -> Self {
        Inliner {
            compact,
            raw: compact
                .norms()
                .iter()
                .map(|n| (n.name.clone(), derive_states(n)))
                .collect(),
            done: HashMap::new(),
            stack: Vec::new(),
            fresh: 0,
        }
    }

    fn table(&mut self, mut table: NormStateTable) -> Result<NormStateTable, NormError> {
        let norm = table.norm.clone();
        for (name, entry) in table.states.iter_mut() {
            self.fresh = 0;
            self.stack.push((norm.clone(), name.clone()));
            let result = self.inline(&entry.formula);
            self.stack.pop();
            entry.formula = result?;
        }
        for (name, formula) in table.declared.iter_mut() {
            self.fresh = 0;
            self.stack.push((norm.clone(), name.clone()));
            let result = self.inline(formula);
            self.stack.pop();
            *formula = result?;
        }
        Ok(table)
    }

    /// Fully inlined formula of a state of some norm in the compact.
    fn state(&mut self, norm: &str, state: &str) -> Result<Formula, NormError> {
        let key = (norm.to_string(), state.to_string());
        if let Some(f) = self.done.get(&key) {
            return Ok(f.clone());
        }
        if let Some(start) = self.stack.iter().position(|k| *k == key) {
            let mut cycle: Vec<String> = self.stack[start..]
                .iter()
                .map(|(n, s)| format!("{n}:{s}"))
                .collect();
            cycle.push(format!("{norm}:{state}"));
            return Err(NormError::CyclicNormReference(cycle));
        }
        let raw = self
            .raw
            .get(norm)
            .and_then(|t| t.state(state))
            .cloned()
            .ok_or_else(|| NormError::UnknownState(norm.into(), state.into()))?;
        self.stack.push(key.clone());
        let result = self.inline(&raw);
        self.stack.pop();
        let f = result?;
        self.done.insert(key, f.clone());
        Ok(f)
    }

    fn inline(&mut self, f: &Formula) -> Result<Formula, NormError> {
        Ok(match f {
            Formula::Ref(r) => {
                let mut target = self.state(&r.norm, &r.state)?;
                let spec = self
                    .compact
                    .norm(&r.norm)
                    .ok_or_else(|| NormError::UnknownState(r.norm.clone(), r.state.clone()))?;
                let binding = RefBinding::new(spec, r, ("", ""));
                rename_names(&mut target, &binding);
                self.fresh += 1;
                let n = self.fresh;
                target.rename_time_vars(&mut |v| {
                    if v == NOW {
                        v.to_string()
                    } else {
                        format!("{v}'{n}")
                    }
                });
                target
            }
            Formula::And(l, r) => Formula::and(self.inline(l)?, self.inline(r)?),
            Formula::Or(l, r) => Formula::or(self.inline(l)?, self.inline(r)?),
            Formula::Except(l, r) => Formula::except(self.inline(l)?, self.inline(r)?),
            Formula::Not(inner) => Formula::not(self.inline(inner)?),
            Formula::Event(_) | Formula::Late(_) | Formula::Const(_) => f.clone(),
        })
    }
}

fn rename_names(f: &mut Formula, binding: &RefBinding) {
    let map = |name: &mut String| {
        if let Some(to) = binding.substitution.get(name.as_str()) {
            *name = to.clone();
        }
    };
    match f {
        Formula::Event(e) => {
            map(&mut e.role);
            e.attrs.iter_mut().for_each(map);
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Except(l, r) => {
            rename_names(l, binding);
            rename_names(r, binding);
        }
        Formula::Not(inner) => rename_names(inner, binding),
        Formula::Ref(_) | Formula::Late(_) | Formula::Const(_) => {}
    }
}
