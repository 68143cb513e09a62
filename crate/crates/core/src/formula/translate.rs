use super::ir::Formula;
use crate::lang::{CondExpr, Effect, PolicyAst, SpaceExpr, TimeOfDay};
use crate::space::SpaceRegistry;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("policy \"{policy}\" references unknown space \"{space}\"")]
pub struct TranslateError {
    pub policy: String,
    pub space: String,
}

/// Conjunction of the policy's present fields, ignoring its effect.
///
/// For a deny policy this is the `Q` of its `¬Q` encoding.
pub fn translate_conditions(policy: &PolicyAst, registry: &SpaceRegistry) -> Result<Formula, TranslateError> {
    let unknown = |space: &str| TranslateError {
        policy: policy.name.clone(),
        space: space.to_string(),
    };
    let mut parts = Vec::with_capacity(4);
    if let Some(p) = &policy.principal {
        parts.push(Formula::principal(p.clone()));
    }
    if let Some(a) = policy.action {
        parts.push(Formula::action(a));
    }
    parts.push(translate_space(&policy.space, registry).map_err(|s| unknown(&s))?);
    if let Some(c) = &policy.condition {
        parts.push(translate_condition(c, registry).map_err(|s| unknown(&s))?);
    }
    Ok(Formula::and(parts))
}

/// Allow policies become the conjunction of their fields; deny policies its negation.
pub fn translate_policy(policy: &PolicyAst, registry: &SpaceRegistry) -> Result<Formula, TranslateError> {
    let inner = translate_conditions(policy, registry)?;
    Ok(match policy.effect {
        Effect::Allow => inner,
        Effect::Deny => Formula::not(inner),
    })
}

fn translate_space(e: &SpaceExpr, registry: &SpaceRegistry) -> Result<Formula, String> {
    Ok(match e {
        SpaceExpr::Id(id) => Formula::point_in(registry.box_of(id).ok_or_else(|| id.clone())?),
        SpaceExpr::Not(inner) => Formula::not(translate_space(inner, registry)?),
        SpaceExpr::And(l, r) => Formula::and([translate_space(l, registry)?, translate_space(r, registry)?]),
        SpaceExpr::Or(l, r) => Formula::or([translate_space(l, registry)?, translate_space(r, registry)?]),
    })
}

fn translate_condition(e: &CondExpr, registry: &SpaceRegistry) -> Result<Formula, String> {
    Ok(match e {
        CondExpr::TodAfter(t) => Formula::time_in(*t, TimeOfDay::END_OF_DAY),
        CondExpr::TodBefore(t) => Formula::time_in(TimeOfDay::MIDNIGHT, *t),
        CondExpr::WhenInside(id) => Formula::user_in(registry.box_of(id).ok_or_else(|| id.clone())?),
        CondExpr::Not(inner) => Formula::not(translate_condition(inner, registry)?),
        CondExpr::And(l, r) => {
            Formula::and([translate_condition(l, registry)?, translate_condition(r, registry)?])
        }
        CondExpr::Or(l, r) => Formula::or([translate_condition(l, registry)?, translate_condition(r, registry)?]),
    })
}

/// `(∨ allows) ∧ (∧ denies)`, where each deny already carries its negation.
/// No allows means default deny.
pub fn combine_for_point(allows: Vec<Formula>, denies: Vec<Formula>) -> Formula {
    if allows.is_empty() {
        return Formula::False;
    }
    let allow = if allows.len() == 1 {
        allows.into_iter().next().unwrap()
    } else {
        Formula::Or(allows)
    };
    if denies.is_empty() {
        return allow;
    }
    let mut parts = Vec::with_capacity(denies.len() + 1);
    parts.push(allow);
    parts.extend(denies);
    Formula::And(parts)
}
