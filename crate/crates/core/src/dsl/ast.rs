//! Syntax tree for compact specifications.
//!
//! The same [`Formula`] type carries both parsed state formulas and the
//! normalized formulas produced by `norm`; the parser only ever builds the
//! `Event`, `And`, `Or`, `Except` and `Ref` variants.

use std::fmt;

use crate::Time;

/// Reserved time variable naming the evaluation clock.
pub const NOW: &str = "now";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    Commitment,
    Prohibition,
    Authorization,
}

impl NormKind {
    pub fn keyword(self) -> &'static str {
        match self {
            NormKind::Commitment => "commitment",
            NormKind::Prohibition => "prohibition",
            NormKind::Authorization => "authorization",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        match word {
            "commitment" => Some(NormKind::Commitment),
            "prohibition" => Some(NormKind::Prohibition),
            "authorization" => Some(NormKind::Authorization),
            _ => None,
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactSpec {
    pub name: String,
    pub norms: Vec<NormSpec>,
}

impl CompactSpec {
    pub fn norm(&self, name: &str) -> Option<&NormSpec> {
        self.norms.iter().find(|n| n.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormSpec {
    pub kind: NormKind,
    pub name: String,
    /// Role written before the arrow.
    pub expectee: String,
    /// Role written after the arrow.
    pub expector: String,
    pub params: Vec<String>,
    pub states: Vec<State>,
}

impl NormSpec {
    pub fn state(&self, name: &str) -> Option<&Formula> {
        self.states
            .iter()
            .find(|s| s.name == name)
            .map(|s| &s.formula)
    }

    pub fn roles(&self) -> [&str; 2] {
        [&self.expectee, &self.expector]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Event(EventExpr),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// Body holds and the exception does not, under the body's bindings.
    Except(Box<Formula>, Box<Formula>),
    Ref(NormStateRef),
    /// Negation; only introduced by state derivation.
    Not(Box<Formula>),
    /// `now` is strictly later than the bound; only introduced by derivation.
    Late(TimeArith),
    Const(bool),
}

impl Formula {
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn except(body: Formula, exception: Formula) -> Formula {
        Formula::Except(Box::new(body), Box::new(exception))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Pre-order walk over every node.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Except(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Formula::Not(inner) => inner.visit(f),
            Formula::Event(_) | Formula::Ref(_) | Formula::Late(_) | Formula::Const(_) => {}
        }
    }

    pub fn contains_ref(&self) -> bool {
        let mut found = false;
        self.visit(&mut |n| found |= matches!(n, Formula::Ref(_)));
        found
    }

    /// True when the formula reads the evaluation clock.
    pub fn uses_now(&self) -> bool {
        let mut found = false;
        self.visit(&mut |n| match n {
            Formula::Late(_) => found = true,
            Formula::Event(e) => {
                if let Some(t) = &e.time {
                    found |= t.arith_terms().any(|a| a.var() == Some(NOW));
                }
            }
            _ => {}
        });
        found
    }

    /// Number of atoms (events and clock checks).
    pub fn atom_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |node| {
            if matches!(node, Formula::Event(_) | Formula::Late(_)) {
                n += 1;
            }
        });
        n
    }

    /// Applies `f` to every time variable name, binding or use.
    pub fn rename_time_vars(&mut self, f: &mut impl FnMut(&str) -> String) {
        match self {
            Formula::Event(e) => {
                if let Some(t) = &mut e.time {
                    t.rename_vars(f);
                }
            }
            Formula::Late(a) => a.rename_var(f),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Except(l, r) => {
                l.rename_time_vars(f);
                r.rename_time_vars(f);
            }
            Formula::Not(inner) => inner.rename_time_vars(f),
            Formula::Ref(_) | Formula::Const(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventExpr {
    /// Document attribute naming the agent expected to report the event.
    pub role: String,
    pub event: String,
    pub attrs: Vec<String>,
    pub time: Option<TimeAnnot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormStateRef {
    pub norm: String,
    pub roles: [String; 2],
    pub params: Vec<String>,
    pub state: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: Time, rhs: Time) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeAnnot {
    /// Binds the variable to the event's time.
    Label(String),
    /// Binds the variable, then compares it with `rhs`.
    Compare { var: String, op: CmpOp, rhs: TimeArith },
    /// Closed interval on the event's time.
    Interval { lo: TimeArith, hi: TimeArith },
}

impl TimeAnnot {
    /// Variable bound by this annotation, if any.
    pub fn bound_var(&self) -> Option<&str> {
        match self {
            TimeAnnot::Label(v) | TimeAnnot::Compare { var: v, .. } => Some(v),
            TimeAnnot::Interval { .. } => None,
        }
    }

    /// Arithmetic terms read (not bound) by this annotation.
    pub fn arith_terms(&self) -> impl Iterator<Item = &TimeArith> {
        let (a, b) = match self {
            TimeAnnot::Label(_) => (None, None),
            TimeAnnot::Compare { rhs, .. } => (Some(rhs), None),
            TimeAnnot::Interval { lo, hi } => (Some(lo), Some(hi)),
        };
        a.into_iter().chain(b)
    }

    fn rename_vars(&mut self, f: &mut impl FnMut(&str) -> String) {
        match self {
            TimeAnnot::Label(v) => *v = f(v),
            TimeAnnot::Compare { var, rhs, .. } => {
                *var = f(var);
                rhs.rename_var(f);
            }
            TimeAnnot::Interval { lo, hi } => {
                lo.rename_var(f);
                hi.rename_var(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeArith {
    Var { name: String, offset: Time },
    Lit(Time),
}

impl TimeArith {
    pub fn var(&self) -> Option<&str> {
        match self {
            TimeArith::Var { name, .. } => Some(name),
            TimeArith::Lit(_) => None,
        }
    }

    pub fn shifted(&self, by: Time) -> TimeArith {
        match self {
            TimeArith::Var { name, offset } => TimeArith::Var {
                name: name.clone(),
                offset: offset + by,
            },
            TimeArith::Lit(n) => TimeArith::Lit(n + by),
        }
    }

    fn rename_var(&mut self, f: &mut impl FnMut(&str) -> String) {
        if let TimeArith::Var { name, .. } = self {
            if name != NOW {
                *name = f(name);
            }
        }
    }
}

impl fmt::Display for TimeArith {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeArith::Var { name, offset } if *offset > 0 => write!(f, "{name}+{offset}"),
            TimeArith::Var { name, offset } if *offset < 0 => write!(f, "{name}-{}", -offset),
            TimeArith::Var { name, .. } => f.write_str(name),
            TimeArith::Lit(n) => write!(f, "{n}"),
        }
    }
}
