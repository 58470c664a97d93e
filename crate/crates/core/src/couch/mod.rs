//! CouchDB design documents for norm views.
//!
//! Each state becomes a JavaScript map function of the shape
//!
//! ```text
//! function (doc) {
//!  // created
//!  <created>
//!  // <state>
//!  && (<state predicate>)
//!  && emit(doc)
//! }
//! ```
//!
//! Time labels need no variables in the generated code: a history holds at
//! most one event per name, so a label bound by `E` is just `doc.E.$time`.

mod client;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde_json::{json, Value};
use thiserror::Error;

pub use client::{CouchClient, CouchError};

use crate::dsl::{EventExpr, Formula, NormKind, TimeAnnot, TimeArith, NOW};
use crate::norm::NormStateTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Atoms check `$by` and attribute presence as well as event presence.
    #[default]
    Simplified,
    /// Presence-only atoms and the redundant commitment `discharged`
    /// disjunction, as in the hand-written design documents this format
    /// comes from.
    Verbatim,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("{norm}.{state}: cannot compile {what} to a map function")]
    UnsupportedConstruct {
        norm: String,
        state: String,
        what: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignDocument {
    pub norm: String,
    pub language: String,
    /// State name to map function source.
    pub views: IndexMap<String, String>,
}

impl DesignDocument {
    /// Body as stored under `_design/<Norm>`.
    pub fn body_json(&self) -> Value {
        let views: serde_json::Map<String, Value> = self
            .views
            .iter()
            .map(|(state, map)| (state.clone(), json!({ "map": map })))
            .collect();
        json!({ "language": self.language, "views": views })
    }

    /// `{"<Norm>": {"language": .., "views": {..}}}`
    pub fn to_json(&self) -> Value {
        json!({ &self.norm: self.body_json() })
    }

    pub fn to_pretty_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("json") + "\n"
    }

    /// Writes `<dir>/_design/<Norm>.json` and returns its path.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> std::io::Result<PathBuf> {
        let design = dir.as_ref().join("_design");
        std::fs::create_dir_all(&design)?;
        let path = design.join(format!("{}.json", self.norm));
        std::fs::write(&path, self.to_pretty_string())?;
        Ok(path)
    }
}

/// A state's map predicate before rendering: the created formula, then the
/// state's parts, each optionally preceded by a comment line. The predicate
/// is `created ∧ (part₁ ∧ part₂ ∧ …)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapPlan {
    pub created: Formula,
    pub parts: Vec<(Option<String>, Formula)>,
}

impl MapPlan {
    pub fn formula(&self) -> Formula {
        self.parts
            .iter()
            .map(|(_, f)| f.clone())
            .reduce(Formula::and)
            .map_or_else(|| self.created.clone(), |body| Formula::and(self.created.clone(), body))
    }
}

pub fn map_plan(table: &NormStateTable, state: &str, mode: Mode) -> Option<MapPlan> {
    let entry = table.states.get(state)?;
    let created = table.state("created")?.clone();
    if state == "created" {
        return Some(MapPlan {
            created,
            parts: vec![],
        });
    }
    let discharged_full = |mode: Mode| -> Option<Formula> {
        let cs = table.state("discharged")?.clone();
        match (mode, table.kind, table.state("detached")) {
            (Mode::Verbatim, NormKind::Commitment, Some(cd)) => Some(Formula::or(
                cs,
                Formula::and(cd.clone(), table.declared["discharged"].clone()),
            )),
            _ => Some(cs),
        }
    };
    let parts = match (state, entry.derived, table.kind) {
        ("violated", true, NormKind::Commitment | NormKind::Authorization) => {
            let mut parts = vec![
                (Some("detached".to_string()), table.state("detached")?.clone()),
                (Some("not discharged".to_string()), Formula::not(discharged_full(mode)?)),
            ];
            if let Some(b) = &entry.deadline {
                parts.push((Some("late".to_string()), Formula::Late(b.clone())));
            }
            parts
        }
        ("discharged", _, _) => vec![(Some(state.to_string()), discharged_full(mode)?)],
        _ => vec![(Some(state.to_string()), entry.formula.clone())],
    };
    Some(MapPlan { created, parts })
}

/// Renders every state of `table` as a map function.
pub fn emit_design_document(table: &NormStateTable, mode: Mode) -> Result<DesignDocument, EmitError> {
    let mut views = IndexMap::new();
    for state in table.states.keys() {
        let plan = map_plan(table, state, mode).expect("state exists");
        let mut js = Js {
            mode,
            uses_now: false,
            unsupported: None,
        };
        let source = js.render_plan(&plan);
        if let Some(what) = js.unsupported {
            return Err(EmitError::UnsupportedConstruct {
                norm: table.norm.clone(),
                state: state.clone(),
                what,
            });
        }
        views.insert(state.clone(), source);
    }
    Ok(DesignDocument {
        norm: table.norm.clone(),
        language: "javascript".into(),
        views,
    })
}

/// Variable name to the JS expression for its time; `None` when `or`
/// branches disagree about it.
type Env = HashMap<String, Option<String>>;

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Or,
    And,
    Atom,
}

struct Js {
    mode: Mode,
    uses_now: bool,
    unsupported: Option<String>,
}

const NOW_LINE: &str = " var now = 0;\n for (var k in doc) {\n  if (doc[k] && typeof doc[k].$time === \"number\" && doc[k].$time > now) now = doc[k].$time;\n }\n";

impl Js {
    fn fail(&mut self, what: impl Into<String>) -> String {
        self.unsupported.get_or_insert_with(|| what.into());
        "false".into()
    }

    fn render_plan(&mut self, plan: &MapPlan) -> String {
        let mut env = Env::new();
        let (created, prec) = self.expr(&plan.created, &mut env);
        let mut body = format!(" // created\n {}\n", paren_below(created, prec, Prec::And));
        for (i, (comment, part)) in plan.parts.iter().enumerate() {
            if let Some(c) = comment {
                body += &format!(" // {c}\n");
            }
            let text = match part {
                // Long negated disjunctions get one disjunct per line.
                Formula::Not(inner) if matches!(**inner, Formula::Or(..)) => {
                    let scope = env.clone();
                    let branches: Vec<String> = disjuncts(inner)
                        .into_iter()
                        .map(|d| {
                            let (s, p) = self.expr(d, &mut scope.clone());
                            paren_below(s, p, Prec::And)
                        })
                        .collect();
                    format!("!({})", branches.join("\n      || "))
                }
                _ => {
                    let (s, p) = self.expr(part, &mut env);
                    paren_below(s, p, Prec::And)
                }
            };
            let open = if i == 0 { "(" } else { "" };
            let close = if i + 1 == plan.parts.len() { ")" } else { "" };
            body += &format!(" && {open}{text}{close}\n");
        }
        let now = if self.uses_now { NOW_LINE } else { "" };
        format!("function (doc) {{\n{now}{body} && emit(doc)\n}}")
    }

    fn expr(&mut self, f: &Formula, env: &mut Env) -> (String, Prec) {
        match f {
            Formula::Event(e) => self.atom(e, env),
            Formula::And(l, r) => {
                let (l, lp) = self.expr(l, env);
                let (r, rp) = self.expr(r, env);
                (
                    format!("{} && {}", paren_below(l, lp, Prec::And), paren_below(r, rp, Prec::And)),
                    Prec::And,
                )
            }
            Formula::Or(l, r) => {
                let mut le = env.clone();
                let mut re = env.clone();
                let (l, lp) = self.expr(l, &mut le);
                let (r, rp) = self.expr(r, &mut re);
                for (k, v) in le.iter().chain(re.iter()) {
                    if env.contains_key(k) {
                        continue;
                    }
                    let same = le.get(k) == re.get(k);
                    env.insert(k.clone(), if same { v.clone() } else { None });
                }
                (format!("{} || {}", paren_below(l, lp, Prec::Or), paren_below(r, rp, Prec::Or)), Prec::Or)
            }
            Formula::Except(body, exception) => {
                let (b, bp) = self.expr(body, env);
                let (x, _) = self.expr(exception, &mut env.clone());
                (format!("{} && !({x})", paren_below(b, bp, Prec::And)), Prec::And)
            }
            Formula::Not(inner) => {
                let (x, _) = self.expr(inner, &mut env.clone());
                (format!("!({x})"), Prec::Atom)
            }
            Formula::Late(bound) => {
                self.uses_now = true;
                let b = self.arith(bound, env);
                (format!("now > {b}"), Prec::Atom)
            }
            Formula::Const(b) => (b.to_string(), Prec::Atom),
            Formula::Ref(r) => (self.fail(format!("unresolved reference to {}", r.norm)), Prec::Atom),
        }
    }

    fn atom(&mut self, e: &EventExpr, env: &mut Env) -> (String, Prec) {
        let ev = format!("doc.{}", e.event);
        let time = format!("{ev}.$time");
        let mut checks = vec![ev.clone()];
        if self.mode == Mode::Simplified {
            checks.push(format!("{ev}.$by === doc.{}", e.role));
            for a in &e.attrs {
                checks.push(format!("{ev}.{a} !== undefined"));
            }
        }
        match &e.time {
            None => {}
            Some(TimeAnnot::Label(v)) => {
                if let Some(c) = self.bind(v, &time, env) {
                    checks.push(c);
                }
            }
            Some(TimeAnnot::Compare { var, op, rhs }) => {
                if let Some(c) = self.bind(var, &time, env) {
                    checks.push(c);
                }
                let r = self.arith(rhs, env);
                checks.push(format!("{time} {} {r}", op.symbol()));
            }
            Some(TimeAnnot::Interval { lo, hi }) => {
                let lo = self.arith(lo, env);
                let hi = self.arith(hi, env);
                checks.push(format!("{time} >= {lo}"));
                checks.push(format!("{time} <= {hi}"));
            }
        }
        let prec = if checks.len() == 1 { Prec::Atom } else { Prec::And };
        (checks.join(" && "), prec)
    }

    /// Binds `var` to `time`, or returns the equality check against its
    /// existing binding.
    fn bind(&mut self, var: &str, time: &str, env: &mut Env) -> Option<String> {
        match env.get(var) {
            None => {
                env.insert(var.to_string(), Some(time.to_string()));
                None
            }
            Some(Some(bound)) if bound == time => None,
            Some(Some(bound)) => Some(format!("{time} === {bound}")),
            Some(None) => Some(self.fail(format!("time variable `{var}` bound differently in `or` branches"))),
        }
    }

    fn arith(&mut self, a: &TimeArith, env: &Env) -> String {
        let (base, offset) = match a {
            TimeArith::Lit(n) => return n.to_string(),
            TimeArith::Var { name, offset } if name == NOW => {
                self.uses_now = true;
                ("now".to_string(), *offset)
            }
            TimeArith::Var { name, offset } => match env.get(name) {
                Some(Some(expr)) => (expr.clone(), *offset),
                Some(None) => (self.fail(format!("time variable `{name}` bound differently in `or` branches")), 0),
                None => (self.fail(format!("unbound time variable `{name}`")), 0),
            },
        };
        match offset {
            0 => base,
            n if n > 0 => format!("({base} + {n})"),
            n => format!("({base} - {})", -n),
        }
    }
}

fn paren_below(s: String, prec: Prec, min: Prec) -> String {
    if prec < min {
        format!("({s})")
    } else {
        s
    }
}

fn disjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::Or(l, r) => {
            let mut v = disjuncts(l);
            v.extend(disjuncts(r));
            v
        }
        _ => vec![f],
    }
}
