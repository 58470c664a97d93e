use std::collections::{BTreeMap, HashSet};

use super::ast::*;
use super::DslError;

/// A cross-norm reference linked to its target, with the renaming that maps
/// the target's header names onto the arguments written at the use site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefBinding {
    pub norm: String,
    pub state: String,
    pub target: String,
    pub target_state: String,
    pub substitution: BTreeMap<String, String>,
}

impl RefBinding {
    pub fn new(target: &NormSpec, r: &NormStateRef, from: (&str, &str)) -> RefBinding {
        let substitution = target
            .roles()
            .into_iter()
            .zip(r.roles.iter())
            .chain(target.params.iter().map(String::as_str).zip(r.params.iter()))
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        RefBinding {
            norm: from.0.to_string(),
            state: from.1.to_string(),
            target: r.norm.clone(),
            target_state: r.state.clone(),
            substitution,
        }
    }
}

/// A compact whose references and time variables have been checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedCompact {
    spec: CompactSpec,
    refs: Vec<RefBinding>,
}

impl ResolvedCompact {
    pub fn spec(&self) -> &CompactSpec {
        &self.spec
    }

    pub fn norms(&self) -> &[NormSpec] {
        &self.spec.norms
    }

    pub fn norm(&self, name: &str) -> Option<&NormSpec> {
        self.spec.norm(name)
    }

    /// Every cross-norm reference, in textual order.
    pub fn ref_bindings(&self) -> &[RefBinding] {
        &self.refs
    }

    pub fn into_spec(self) -> CompactSpec {
        self.spec
    }
}

/// Standard states the norm kind adds on top of the declared ones.
///
/// A derived state appears only when the declared states it is built from
/// exist and the name is not already declared.
pub fn derived_state_names(norm: &NormSpec) -> Vec<&'static str> {
    let has = |s: &str| norm.state(s).is_some();
    let mut out = Vec::new();
    match norm.kind {
        NormKind::Commitment => {
            if has("detached") && has("discharged") && !has("violated") {
                out.push("violated");
            }
            if has("detached") && !has("expired") {
                out.push("expired");
            }
        }
        NormKind::Prohibition => {
            if has("violated") && !has("satisfied") {
                out.push("satisfied");
            }
        }
        NormKind::Authorization => {
            if has("detached") && has("discharged") && !has("violated") {
                out.push("violated");
            }
        }
    }
    out
}

/// Checks every cross-norm reference and time variable.
pub fn resolve(spec: CompactSpec) -> Result<ResolvedCompact, DslError> {
    let mut refs = Vec::new();
    for norm in &spec.norms {
        let mut scope: HashSet<&str> = HashSet::new();
        for state in &norm.states {
            let ctx = (norm.name.as_str(), state.name.as_str());
            check_formula(&spec, ctx, &state.formula, &mut scope, &mut refs)?;
        }
    }
    Ok(ResolvedCompact { spec, refs })
}

fn check_formula<'a>(
    spec: &'a CompactSpec,
    ctx: (&str, &str),
    f: &'a Formula,
    scope: &mut HashSet<&'a str>,
    refs: &mut Vec<RefBinding>,
) -> Result<(), DslError> {
    match f {
        Formula::Event(e) => {
            if let Some(annot) = &e.time {
                for term in annot.arith_terms() {
                    if let Some(var) = term.var() {
                        if var != NOW && !scope.contains(var) {
                            return Err(DslError::UnboundTimeVariable {
                                norm: ctx.0.into(),
                                state: ctx.1.into(),
                                var: var.into(),
                            });
                        }
                    }
                }
                if let Some(var) = annot.bound_var() {
                    if var == NOW {
                        return Err(DslError::ReservedTimeVariable {
                            norm: ctx.0.into(),
                            state: ctx.1.into(),
                        });
                    }
                    scope.insert(var);
                }
            }
            Ok(())
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Except(l, r) => {
            check_formula(spec, ctx, l, scope, refs)?;
            check_formula(spec, ctx, r, scope, refs)
        }
        Formula::Not(inner) => check_formula(spec, ctx, inner, scope, refs),
        Formula::Ref(r) => {
            let unresolved = || DslError::UnresolvedNormRef {
                norm: ctx.0.into(),
                state: ctx.1.into(),
                target: r.norm.clone(),
                target_state: r.state.clone(),
            };
            let target = spec.norm(&r.norm).ok_or_else(unresolved)?;
            let known = target.state(&r.state).is_some()
                || derived_state_names(target).contains(&r.state.as_str());
            if !known {
                return Err(unresolved());
            }
            if target.params.len() != r.params.len() {
                return Err(DslError::ArityMismatch {
                    norm: ctx.0.into(),
                    state: ctx.1.into(),
                    target: r.norm.clone(),
                    expected: target.params.len(),
                    found: r.params.len(),
                });
            }
            refs.push(RefBinding::new(target, r, ctx));
            Ok(())
        }
        Formula::Late(bound) => match bound.var() {
            Some(var) if var != NOW && !scope.contains(var) => Err(DslError::UnboundTimeVariable {
                norm: ctx.0.into(),
                state: ctx.1.into(),
                var: var.into(),
            }),
            _ => Ok(()),
        },
        Formula::Const(_) => Ok(()),
    }
}
