//! Proptest strategies for policy ASTs.

use proptest::prelude::*;

use vmac_core::lang::{CondExpr, SpaceExpr};
use vmac_core::{Action, Effect, PolicyAst, TimeOfDay};

fn time() -> impl Strategy<Value = TimeOfDay> {
    prop_oneof![
        (0u16..24, 0u16..60).prop_map(|(h, m)| TimeOfDay::new(h * 100 + m).unwrap()),
        Just(TimeOfDay::END_OF_DAY),
    ]
}

fn ident() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z_][a-z0-9_]{0,10}",
        // Anything printable, including quotes, backslashes and keywords.
        "[ -~\t\n]{1,10}",
        Just("Or".to_string()),
        Just("Not".to_string()),
    ]
}

fn space_expr() -> impl Strategy<Value = SpaceExpr> {
    ident().prop_map(SpaceExpr::Id).prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(SpaceExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| SpaceExpr::and(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| SpaceExpr::or(l, r)),
        ]
    })
}

fn cond_expr() -> impl Strategy<Value = CondExpr> {
    let leaf = prop_oneof![
        time().prop_map(CondExpr::TodAfter),
        time().prop_map(CondExpr::TodBefore),
        ident().prop_map(CondExpr::WhenInside),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(CondExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| CondExpr::and(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| CondExpr::or(l, r)),
        ]
    })
}

pub fn policy() -> impl Strategy<Value = PolicyAst> {
    (
        ident(),
        prop_oneof![Just(Effect::Allow), Just(Effect::Deny)],
        proptest::option::of(ident()),
        proptest::option::of(prop_oneof![Just(Action::Read), Just(Action::Write), Just(Action::Localize)]),
        space_expr(),
        proptest::option::of(cond_expr()),
    )
        .prop_map(|(name, effect, principal, action, space, condition)| PolicyAst {
            name,
            effect,
            principal,
            action,
            space,
            condition,
        })
}
