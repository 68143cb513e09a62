use std::fmt;

use super::ast::PolicyAst;
use crate::space::SpaceRegistry;

/// Where an unresolved space id was referenced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefSite {
    SpaceExpr,
    /// A `WhenInside` / `UserInside` condition atom.
    Condition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub policy: String,
    pub space_id: String,
    pub site: RefSite,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = match self.site {
            RefSite::SpaceExpr => "space expression",
            RefSite::Condition => "condition atom `WhenInside`",
        };
        write!(
            f,
            "policy \"{}\": unknown space id \"{}\" in {site}",
            self.policy, self.space_id
        )
    }
}

/// One diagnostic per reference to a space id the registry does not know.
pub fn validate_against_registry(policies: &[PolicyAst], registry: &SpaceRegistry) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for p in policies {
        let mut push = |id: &str, site| {
            if !registry.contains(id) {
                out.push(Diagnostic {
                    policy: p.name.clone(),
                    space_id: id.to_string(),
                    site,
                });
            }
        };
        for id in p.space.ids() {
            push(id, RefSite::SpaceExpr);
        }
        if let Some(cond) = &p.condition {
            for id in cond.space_ids() {
                push(id, RefSite::Condition);
            }
        }
    }
    out
}
