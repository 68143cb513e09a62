use std::collections::BTreeSet;

use super::solver::{Assignment, RegionSolver, SatBackend};
use super::{AuditError, AuditReport, AuditResult};
use crate::engine::PolicyStore;
use crate::formula::{combine_for_point, translate_policy, Formula};
use crate::lang::{Effect, PolicyAst};
use crate::space::Box3;

/// Marker reported in principal lists for every principal no policy names.
pub const EVERYONE_ELSE: &str = "*";

/// Read-only audit queries over one policy store.
///
/// The formula of a space combines the policies indexed under the space and
/// under each of its ancestors, exactly as a decision for a point that lies
/// in the space but in none of its children would.
pub struct Auditor<'s, B = RegionSolver> {
    store: &'s PolicyStore,
    backend: B,
}

impl<'s> Auditor<'s, RegionSolver> {
    pub fn new(store: &'s PolicyStore) -> Self {
        Auditor {
            store,
            backend: RegionSolver::default(),
        }
    }
}

struct Split {
    allows: Vec<Formula>,
    denies: Vec<Formula>,
}

impl Split {
    fn combined(&self) -> Formula {
        combine_for_point(self.allows.clone(), self.denies.clone())
    }

    /// The `Q` of every deny, whose formula is `¬Q`.
    fn deny_bodies(&self) -> Vec<Formula> {
        self.denies
            .iter()
            .map(|d| match d {
                Formula::Not(q) => (**q).clone(),
                other => Formula::not(other.clone()),
            })
            .collect()
    }
}

impl<'s, B: SatBackend> Auditor<'s, B> {
    pub fn with_backend(store: &'s PolicyStore, backend: B) -> Self {
        Auditor { store, backend }
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    /// Every principal named by some policy in the store.
    pub fn known_principals(&self) -> BTreeSet<String> {
        self.store.policies().filter_map(|p| p.principal.clone()).collect()
    }

    fn space_box(&self, id: &str) -> Result<Box3, AuditError> {
        self.store
            .registry()
            .box_of(id)
            .ok_or_else(|| AuditError::UnknownSpace(id.to_string()))
    }

    fn split(&self, space_ids: &[&str]) -> Split {
        let mut split = Split {
            allows: Vec::new(),
            denies: Vec::new(),
        };
        for name in self.store.relevant_to(space_ids.iter().copied()) {
            let f = (*self.store.formula(name).expect("indexed policy exists")).clone();
            match self.store.get(name).expect("indexed policy exists").effect {
                Effect::Allow => split.allows.push(f),
                Effect::Deny => split.denies.push(f),
            }
        }
        split
    }

    fn chain_of<'a>(&'a self, id: &'a str) -> Vec<&'a str> {
        let mut chain = vec![id];
        chain.extend(self.store.registry().ancestors(id));
        chain
    }

    /// The combined formula governing points of `space_id`.
    pub fn space_formula(&self, space_id: &str) -> Result<Formula, AuditError> {
        self.space_box(space_id)?;
        Ok(self.split(&self.chain_of(space_id)).combined())
    }

    fn solve(&self, f: &Formula, known: &BTreeSet<String>, allow_fresh: bool) -> Result<Option<Assignment>, AuditError> {
        self.backend.solve(f, known, allow_fresh)
    }

    /// Principals that can get some access to a point of the space under the
    /// optional context constraint. [`EVERYONE_ELSE`] stands for every
    /// principal no policy names.
    pub fn list_principals_with_access(
        &self,
        space_id: &str,
        context: Option<&Formula>,
    ) -> Result<AuditReport, AuditError> {
        let bbox = self.space_box(space_id)?;
        let mut parts = vec![self.space_formula(space_id)?, Formula::point_in(bbox)];
        parts.extend(context.cloned());
        let mut f = Formula::and(parts);
        let mut known = self.known_principals();
        known.extend(f.principals());

        let mut found = Vec::new();
        let mut witnesses = Vec::new();
        let mut allow_fresh = true;
        while let Some(w) = self.solve(&f, &known, allow_fresh)? {
            if w.principal_is_fresh {
                allow_fresh = false;
            } else {
                found.push(w.principal.clone());
                f = Formula::and([f, Formula::not(Formula::principal(w.principal.clone()))]);
            }
            witnesses.push(w);
        }
        if !allow_fresh {
            found.push(EVERYONE_ELSE.to_string());
        }
        let explanation = if found.is_empty() {
            format!("no principal can access any point of \"{space_id}\"")
        } else {
            format!(
                "{} principal(s) can access \"{space_id}\"{}",
                found.len(),
                if allow_fresh { "" } else { "; \"*\" means every principal no policy names" }
            )
        };
        Ok(AuditReport {
            query: "who-has-access".into(),
            result: AuditResult::Principals(found),
            witnesses,
            explanation,
        })
    }

    /// True when every request for a point of the space is allowed.
    pub fn check_too_weak(&self, space_id: &str) -> Result<AuditReport, AuditError> {
        let inside = Formula::point_in(self.space_box(space_id)?);
        let f = self.space_formula(space_id)?;
        let q = Formula::and([inside, Formula::not(f)]);
        let denied = self.solve(&q, &self.known_principals(), true)?;
        let too_weak = denied.is_none();
        Ok(AuditReport {
            query: "too-weak".into(),
            result: AuditResult::Bool(too_weak),
            explanation: if too_weak {
                format!("every principal may perform every action anywhere in \"{space_id}\" at any time")
            } else {
                format!("some request inside \"{space_id}\" is denied; the witness is one")
            },
            witnesses: denied.into_iter().collect(),
        })
    }

    /// True when not even the owner can access any point of the space.
    pub fn check_too_strong(&self, space_id: &str, owner: &str) -> Result<AuditReport, AuditError> {
        let inside = Formula::point_in(self.space_box(space_id)?);
        let q = Formula::and([self.space_formula(space_id)?, Formula::principal(owner), inside]);
        let access = self.solve(&q, &self.known_principals(), false)?;
        let too_strong = access.is_none();
        Ok(AuditReport {
            query: "too-strong".into(),
            result: AuditResult::Bool(too_strong),
            explanation: if too_strong {
                format!("owner \"{owner}\" cannot access any point of \"{space_id}\"")
            } else {
                format!("owner \"{owner}\" can access \"{space_id}\"; the witness is one such request")
            },
            witnesses: access.into_iter().collect(),
        })
    }

    /// True when adding the allow policy would permit some request that the
    /// current policies deny, in at least one space it names.
    pub fn check_new_allow_effective(&self, policy: &PolicyAst) -> Result<AuditReport, AuditError> {
        if policy.effect != Effect::Allow {
            return Err(AuditError::NotAnAllow);
        }
        let new_f = translate_policy(policy, self.store.registry())?;
        let mut known = self.known_principals();
        known.extend(policy.principal.clone());

        let mut seen = BTreeSet::new();
        for space_id in policy.space.ids() {
            if !seen.insert(space_id) {
                continue;
            }
            let inside = Formula::point_in(self.space_box(space_id)?);
            let split = self.split(&self.chain_of(space_id));
            let old = split.combined();
            let mut allows = split.allows.clone();
            allows.push(new_f.clone());
            let new = combine_for_point(allows, split.denies.clone());
            let q = Formula::and([new, Formula::not(old), inside]);
            if let Some(w) = self.solve(&q, &known, true)? {
                return Ok(AuditReport {
                    query: "new-allow-effective".into(),
                    result: AuditResult::Bool(true),
                    witnesses: vec![w],
                    explanation: format!(
                        "\"{}\" allows requests in \"{space_id}\" that are denied today; the witness is one",
                        policy.name
                    ),
                });
            }
        }
        Ok(AuditReport {
            query: "new-allow-effective".into(),
            result: AuditResult::Bool(false),
            witnesses: vec![],
            explanation: format!(
                "\"{}\" would not change any decision; existing allows already cover it or denies override it",
                policy.name
            ),
        })
    }

    /// Principals for whom an allow and a deny governing the space both
    /// apply to the same request inside it.
    pub fn find_allow_deny_conflicts(&self, space_id: &str) -> Result<AuditReport, AuditError> {
        let inside = Formula::point_in(self.space_box(space_id)?);
        let split = self.split(&self.chain_of(space_id));
        let clash = Formula::and([
            Formula::or(split.allows.clone()),
            Formula::or(split.deny_bodies()),
            inside,
        ]);
        let known = self.known_principals();

        let mut found = Vec::new();
        let mut witnesses = Vec::new();
        for name in &known {
            let q = Formula::and([clash.clone(), Formula::principal(name.clone())]);
            if let Some(w) = self.solve(&q, &known, false)? {
                found.push(name.clone());
                witnesses.push(w);
            }
        }
        let unnamed = Formula::and(
            std::iter::once(clash).chain(known.iter().map(|n| Formula::not(Formula::principal(n.clone())))),
        );
        if let Some(w) = self.solve(&unnamed, &known, true)? {
            found.push(EVERYONE_ELSE.to_string());
            witnesses.push(w);
        }
        Ok(AuditReport {
            query: "conflicts".into(),
            explanation: if found.is_empty() {
                format!("no allow and deny policy governing \"{space_id}\" overlap")
            } else {
                format!("allow and deny policies overlap in \"{space_id}\"; denies win for these principals")
            },
            result: AuditResult::Principals(found),
            witnesses,
        })
    }

    /// True when the space's own policies allow some request inside it that
    /// the policies of its enclosing spaces do not.
    pub fn check_more_permissive_than_parent(&self, space_id: &str) -> Result<AuditReport, AuditError> {
        let inside = Formula::point_in(self.space_box(space_id)?);
        let own = self.split(&[space_id]).combined();
        let chain = self.chain_of(space_id);
        let inherited = self.split(&chain[1..]).combined();
        let q = Formula::and([own, inside, Formula::not(inherited)]);
        let w = self.solve(&q, &self.known_principals(), true)?;
        let more = w.is_some();
        Ok(AuditReport {
            query: "more-permissive-than-parent".into(),
            result: AuditResult::Bool(more),
            explanation: if more {
                format!("policies on \"{space_id}\" allow a request its enclosing spaces' policies do not")
            } else {
                format!("policies on \"{space_id}\" allow nothing beyond its enclosing spaces' policies")
            },
            witnesses: w.into_iter().collect(),
        })
    }
}
