use std::fmt::Write;

use super::ast::*;

/// Renders a compact in the concrete syntax accepted by the parser, one
/// state per line, with the minimum parentheses the precedence rules need.
pub fn pretty_print(spec: &CompactSpec) -> String {
    let mut out = String::new();
    for (i, norm) in spec.norms.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(out, "{} {}({}->{}", norm.kind, norm.name, norm.expectee, norm.expector);
        for p in &norm.params {
            let _ = write!(out, ", {p}");
        }
        out.push_str("):\n");
        for state in &norm.states {
            let _ = writeln!(out, " {}: {}", state.name, pretty_formula(&state.formula));
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Or,
    And,
    Except,
    Atom,
}

pub fn pretty_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, Prec::Or);
    out
}

fn write_formula(out: &mut String, f: &Formula, ctx: Prec) {
    let own = match f {
        Formula::Or(..) => Prec::Or,
        Formula::And(..) => Prec::And,
        Formula::Except(..) => Prec::Except,
        _ => Prec::Atom,
    };
    let paren = own < ctx;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Or(l, r) => {
            write_formula(out, l, Prec::Or);
            out.push_str(" or ");
            write_formula(out, r, Prec::And);
        }
        Formula::And(l, r) => {
            write_formula(out, l, Prec::And);
            out.push_str(" and ");
            write_formula(out, r, Prec::Except);
        }
        Formula::Except(l, r) => {
            write_formula(out, l, Prec::Except);
            out.push_str(" except ");
            write_formula(out, r, Prec::Atom);
        }
        Formula::Event(e) => {
            let _ = write!(out, "{}.{}{{{}}}", e.role, e.event, e.attrs.join(", "));
            match &e.time {
                None => {}
                Some(TimeAnnot::Label(v)) => {
                    let _ = write!(out, " @ {v}");
                }
                Some(TimeAnnot::Compare { var, op, rhs }) => {
                    let _ = write!(out, " @ {var} {} {rhs}", op.symbol());
                }
                Some(TimeAnnot::Interval { lo, hi }) => {
                    let _ = write!(out, " @ [{lo}, {hi}]");
                }
            }
        }
        Formula::Ref(r) => {
            let _ = write!(out, "{}({}->{}", r.norm, r.roles[0], r.roles[1]);
            for p in &r.params {
                let _ = write!(out, ", {p}");
            }
            let _ = write!(out, "):{}", r.state);
        }
        // Not expressible in the surface syntax; rendered for diagnostics.
        Formula::Not(inner) => {
            out.push_str("not ");
            write_formula(out, inner, Prec::Atom);
        }
        Formula::Late(bound) => {
            let _ = write!(out, "now > {bound}");
        }
        Formula::Const(b) => {
            let _ = write!(out, "{b}");
        }
    }
    if paren {
        out.push(')');
    }
}
