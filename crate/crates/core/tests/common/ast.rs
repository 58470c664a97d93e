use compact_core::dsl::{
    is_keyword, CmpOp, CompactSpec, EventExpr, Formula, NormKind, NormSpec, NormStateRef, State, TimeAnnot,
    TimeArith,
};
use proptest::prelude::*;

fn ident() -> impl Strategy<Value = String> {
    "[a-zA-Z][a-zA-Z0-9_]{0,6}".prop_filter("keyword", |s| !is_keyword(s))
}

fn arith() -> impl Strategy<Value = TimeArith> {
    prop_oneof![
        (ident(), -20i64..=20).prop_map(|(name, offset)| TimeArith::Var { name, offset }),
        (0i64..1000).prop_map(TimeArith::Lit),
    ]
}

fn annot() -> impl Strategy<Value = Option<TimeAnnot>> {
    let op = prop_oneof![Just(CmpOp::Lt), Just(CmpOp::Gt), Just(CmpOp::Le), Just(CmpOp::Ge)];
    prop_oneof![
        2 => Just(None),
        1 => ident().prop_map(|v| Some(TimeAnnot::Label(v))),
        1 => (ident(), op, arith()).prop_map(|(var, op, rhs)| Some(TimeAnnot::Compare { var, op, rhs })),
        1 => (arith(), arith()).prop_map(|(lo, hi)| Some(TimeAnnot::Interval { lo, hi })),
    ]
}

fn leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        4 => (ident(), ident(), prop::collection::vec(ident(), 1..4), annot()).prop_map(
            |(role, event, attrs, time)| Formula::Event(EventExpr { role, event, attrs, time })
        ),
        1 => (ident(), ident(), ident(), prop::collection::vec(ident(), 0..3), ident()).prop_map(
            |(norm, a, b, params, state)| Formula::Ref(NormStateRef { norm, roles: [a, b], params, state })
        ),
    ]
}

fn formula() -> impl Strategy<Value = Formula> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Formula::except(l, r)),
        ]
    })
}

fn norm(index: usize) -> impl Strategy<Value = NormSpec> {
    let kind = prop_oneof![
        Just(NormKind::Commitment),
        Just(NormKind::Prohibition),
        Just(NormKind::Authorization)
    ];
    (
        kind,
        ident(),
        ident(),
        ident(),
        prop::collection::vec(ident(), 0..3),
        prop::collection::vec((ident(), formula()), 0..4),
        formula(),
    )
        .prop_map(move |(kind, name, expectee, expector, params, extra, created)| {
            let mut states = vec![State { name: "created".into(), formula: created }];
            for (i, (name, formula)) in extra.into_iter().enumerate() {
                states.push(State { name: format!("{name}{i}"), formula });
            }
            NormSpec {
                kind,
                name: format!("{name}{index}"),
                expectee,
                expector,
                params,
                states,
            }
        })
}

pub fn compact() -> impl Strategy<Value = CompactSpec> {
    (1usize..4)
        .prop_flat_map(|n| (0..n).map(norm).collect::<Vec<_>>())
        .prop_map(|norms| CompactSpec { name: "gen".into(), norms })
}

/// Printing then parsing gives back the same tree.
pub fn round_trips(spec: &CompactSpec) -> Result<(), TestCaseError> {
    let text = compact_core::dsl::pretty_print(spec);
    let parsed = compact_core::dsl::parse_compact(&text, &spec.name);
    prop_assert_eq!(parsed.as_ref(), Ok(spec), "{}", text);
    Ok(())
}
