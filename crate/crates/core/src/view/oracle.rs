use std::collections::BTreeMap;

use crate::dsl::{EventExpr, Formula, TimeAnnot, TimeArith, NOW};
use crate::ledger::{HistoryDoc, Scalar};
use crate::Time;

type Assignment = BTreeMap<String, Option<Time>>;

/// Brute-force truth value of `formula` on `doc`, for cross-checking
/// [`crate::norm::evaluate`].
///
/// Every time variable bound outside negation ranges over "unbound" plus
/// the times of the events whose atoms bind it; the formula holds if some
/// assignment satisfies it. Variables first bound inside a `not` or an
/// `except` branch are quantified locally, within that branch. All
/// sub-results are computed before being combined: no short-circuiting.
pub fn oracle_evaluate(formula: &Formula, doc: &HistoryDoc, now: Time) -> bool {
    exists(formula, doc, now, &Assignment::new())
}

fn exists(f: &Formula, doc: &HistoryDoc, now: Time, outer: &Assignment) -> bool {
    let mut vars: Vec<(String, Vec<Option<Time>>)> = Vec::new();
    collect_binders(f, doc, &mut vars);
    vars.retain(|(v, _)| !outer.contains_key(v));

    let mut any = false;
    let mut idx = vec![0usize; vars.len()];
    loop {
        let mut a = outer.clone();
        for ((v, cands), &i) in vars.iter().zip(&idx) {
            a.insert(v.clone(), cands[i]);
        }
        any |= check(f, doc, now, &a);

        // Odometer step over the candidate lists.
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < vars[k].1.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            return any;
        }
    }
}

/// Variables bound by atoms outside negation, each with its candidates.
fn collect_binders(f: &Formula, doc: &HistoryDoc, out: &mut Vec<(String, Vec<Option<Time>>)>) {
    match f {
        Formula::Event(e) => {
            let Some(var) = e.time.as_ref().and_then(TimeAnnot::bound_var) else {
                return;
            };
            let slot = match out.iter().position(|(v, _)| v == var) {
                Some(i) => i,
                None => {
                    out.push((var.to_string(), vec![None]));
                    out.len() - 1
                }
            };
            if let Some(ev) = doc.event(&e.event) {
                if !out[slot].1.contains(&Some(ev.time)) {
                    out[slot].1.push(Some(ev.time));
                }
            }
        }
        Formula::And(l, r) | Formula::Or(l, r) => {
            collect_binders(l, doc, out);
            collect_binders(r, doc, out);
        }
        Formula::Except(body, _) => collect_binders(body, doc, out),
        Formula::Not(_) | Formula::Ref(_) | Formula::Late(_) | Formula::Const(_) => {}
    }
}

fn check(f: &Formula, doc: &HistoryDoc, now: Time, a: &Assignment) -> bool {
    match f {
        Formula::Event(e) => atom(e, doc, now, a),
        Formula::And(l, r) => {
            let (l, r) = (check(l, doc, now, a), check(r, doc, now, a));
            l & r
        }
        Formula::Or(l, r) => {
            let (l, r) = (check(l, doc, now, a), check(r, doc, now, a));
            l | r
        }
        Formula::Except(body, exception) => {
            let (b, x) = (check(body, doc, now, a), exists(exception, doc, now, a));
            b & !x
        }
        Formula::Not(inner) => !exists(inner, doc, now, a),
        Formula::Late(bound) => value(bound, now, a).map_or(false, |d| now > d),
        Formula::Const(b) => *b,
        Formula::Ref(_) => false,
    }
}

fn value(t: &TimeArith, now: Time, a: &Assignment) -> Option<Time> {
    match t {
        TimeArith::Lit(n) => Some(*n),
        TimeArith::Var { name, offset } if name == NOW => Some(now + offset),
        TimeArith::Var { name, offset } => a.get(name).copied().flatten().map(|t| t + offset),
    }
}

fn atom(e: &EventExpr, doc: &HistoryDoc, now: Time, a: &Assignment) -> bool {
    let Some(ev) = doc.event(&e.event) else {
        return false;
    };
    let by = doc.attr(&e.role).and_then(Scalar::as_str) == Some(ev.by.as_str());
    let attrs = e.attrs.iter().fold(true, |acc, k| acc & ev.attrs.contains_key(k));
    let time = match &e.time {
        None => true,
        Some(TimeAnnot::Label(v)) => a.get(v).copied().flatten() == Some(ev.time),
        Some(TimeAnnot::Compare { var, op, rhs }) => {
            let bound = a.get(var).copied().flatten() == Some(ev.time);
            let cmp = value(rhs, now, a).map_or(false, |r| op.holds(ev.time, r));
            bound & cmp
        }
        Some(TimeAnnot::Interval { lo, hi }) => match (value(lo, now, a), value(hi, now, a)) {
            (Some(lo), Some(hi)) => (lo <= ev.time) & (ev.time <= hi),
            _ => false,
        },
    };
    by & attrs & time
}
