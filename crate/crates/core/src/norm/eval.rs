use super::Binding;
use crate::dsl::{Formula, TimeAnnot, TimeArith, NOW};
use crate::ledger::{HistoryDoc, Scalar};
use crate::Time;

/// Evaluates a state formula against one history.
///
/// An event atom `role.E{a..} @ T` holds when the document records `E`,
/// `E.$by` equals the document's `role` attribute, every listed attribute is
/// present on `E`, and the time annotation holds for `E.$time`. Labels bind
/// left to right across `and`; an `except` branch sees the bindings of its
/// body. Missing events or attributes make atoms false, never errors.
///
/// Returns the time-variable bindings of the first satisfying assignment.
pub fn evaluate(formula: &Formula, doc: &HistoryDoc, now: Time) -> (bool, Binding) {
    let mut atoms = 0;
    evaluate_counted(formula, doc, now, &mut atoms)
}

/// Like [`evaluate`], adding the number of atom checks performed to `atoms`.
pub fn evaluate_counted(
    formula: &Formula,
    doc: &HistoryDoc,
    now: Time,
    atoms: &mut u64,
) -> (bool, Binding) {
    let mut ev = Eval {
        doc,
        now,
        env: Vec::new(),
        atoms: 0,
    };
    let mut found = None;
    let ok = ev.sat(formula, &mut |ev| {
        found = Some(
            ev.env
                .iter()
                .map(|(name, t)| (name.to_string(), *t))
                .collect(),
        );
        true
    });
    *atoms += ev.atoms;
    let binding = Binding {
        times: found.unwrap_or_default(),
        ..Binding::default()
    };
    (ok, binding)
}

struct Eval<'a> {
    doc: &'a HistoryDoc,
    now: Time,
    env: Vec<(&'a str, Time)>,
    atoms: u64,
}

type Cont<'k, 'a> = &'k mut dyn FnMut(&mut Eval<'a>) -> bool;

impl<'a> Eval<'a> {
    fn lookup(&self, var: &str) -> Option<Time> {
        if var == NOW {
            return Some(self.now);
        }
        self.env.iter().rev().find(|(n, _)| *n == var).map(|(_, t)| *t)
    }

    fn arith(&self, a: &TimeArith) -> Option<Time> {
        match a {
            TimeArith::Var { name, offset } => self.lookup(name).map(|t| t + offset),
            TimeArith::Lit(n) => Some(*n),
        }
    }

    /// Binds `var` to `t`, or checks it against an existing binding.
    fn bind(&mut self, var: &'a str, t: Time) -> bool {
        match self.lookup(var) {
            Some(bound) => bound == t,
            None => {
                self.env.push((var, t));
                true
            }
        }
    }

    fn holds(&mut self, f: &'a Formula) -> bool {
        self.sat(f, &mut |_| true)
    }

    /// Searches for assignments satisfying `f`, calling `k` on each until it
    /// returns true. Bindings pushed here are popped before returning.
    fn sat(&mut self, f: &'a Formula, k: Cont<'_, 'a>) -> bool {
        match f {
            Formula::Event(e) => {
                self.atoms += 1;
                let Some(ev) = self.doc.event(&e.event) else {
                    return false;
                };
                if self.doc.attr(&e.role).and_then(Scalar::as_str) != Some(ev.by.as_str()) {
                    return false;
                }
                if !e.attrs.iter().all(|a| ev.attrs.contains_key(a)) {
                    return false;
                }
                let mark = self.env.len();
                let ok = match &e.time {
                    None => true,
                    Some(TimeAnnot::Label(v)) => self.bind(v, ev.time),
                    Some(TimeAnnot::Compare { var, op, rhs }) => {
                        self.bind(var, ev.time)
                            && self.arith(rhs).is_some_and(|r| op.holds(ev.time, r))
                    }
                    Some(TimeAnnot::Interval { lo, hi }) => {
                        match (self.arith(lo), self.arith(hi)) {
                            (Some(lo), Some(hi)) => lo <= ev.time && ev.time <= hi,
                            _ => false,
                        }
                    }
                };
                let result = ok && k(self);
                self.env.truncate(mark);
                result
            }
            Formula::And(l, r) => self.sat(l, &mut |ev| ev.sat(r, &mut *k)),
            Formula::Or(l, r) => self.sat(l, &mut *k) || self.sat(r, k),
            Formula::Except(body, exception) => {
                self.sat(body, &mut |ev| !ev.holds(exception) && k(ev))
            }
            Formula::Not(inner) => !self.holds(inner) && k(self),
            Formula::Late(bound) => {
                self.atoms += 1;
                match self.arith(bound) {
                    Some(deadline) => self.now > deadline && k(self),
                    None => false,
                }
            }
            Formula::Const(b) => *b && k(self),
            // Tables are inlined before evaluation.
            Formula::Ref(_) => false,
        }
    }
}
