//! Per-point access decisions over a policy store, with an LRU decision cache.

mod cache;
mod store;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use cache::{CacheKey, CacheStats, DecisionCache, DEFAULT_CACHE_CAPACITY};
pub use store::{PolicyStore, StoreError};

use crate::formula::{combine_for_point, evaluate, AccessRequest, Formula};
use crate::lang::{Action, Effect, PolicyAst, TimeOfDay};
use crate::space::{Point3, SpaceRegistry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Allow,
    Deny,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Allow => "allow",
            Verdict::Deny => "deny",
        })
    }
}

/// A verdict with the names of the allow policies that matched and the deny
/// policies that blocked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub fired_allow: Arc<[String]>,
    pub fired_deny: Arc<[String]>,
    pub cache_hit: bool,
}

impl Decision {
    pub fn is_allow(&self) -> bool {
        self.verdict == Verdict::Allow
    }

    fn default_deny() -> Self {
        Decision {
            verdict: Verdict::Deny,
            fired_allow: Arc::from([]),
            fired_deny: Arc::from([]),
            cache_hit: false,
        }
    }
}

/// Decides access requests against a [`PolicyStore`].
///
/// `decide` takes `&self` and may run on many threads at once; policy
/// changes take `&mut self` and flush the cache.
#[derive(Debug)]
pub struct DecisionEngine {
    store: PolicyStore,
    cache: Option<DecisionCache>,
}

impl DecisionEngine {
    pub fn new(store: PolicyStore, cache: Option<DecisionCache>) -> Self {
        DecisionEngine { store, cache }
    }

    pub fn cached(store: PolicyStore) -> Self {
        Self::new(store, Some(DecisionCache::default()))
    }

    pub fn uncached(store: PolicyStore) -> Self {
        Self::new(store, None)
    }

    pub fn store(&self) -> &PolicyStore {
        &self.store
    }

    pub fn registry(&self) -> &Arc<SpaceRegistry> {
        self.store.registry()
    }

    pub fn cache(&self) -> Option<&DecisionCache> {
        self.cache.as_ref()
    }

    pub fn add_policy(&mut self, policy: PolicyAst) -> Result<(), StoreError> {
        self.store.add_policy(policy)?;
        self.flush();
        Ok(())
    }

    pub fn remove_policy(&mut self, name: &str) -> Result<PolicyAst, StoreError> {
        let old = self.store.remove_policy(name)?;
        self.flush();
        Ok(old)
    }

    pub fn replace_policy(&mut self, policy: PolicyAst) -> Result<PolicyAst, StoreError> {
        let old = self.store.replace_policy(policy)?;
        self.flush();
        Ok(old)
    }

    fn flush(&self) {
        if let Some(c) = &self.cache {
            c.clear();
        }
    }

    pub fn decide(&self, req: &AccessRequest) -> Decision {
        let registry = self.store.registry();
        let chain = registry.enclosing_indices(req.point);

        let Some(cache) = &self.cache else {
            return self.decide_on_chain(req, &chain);
        };
        let key = CacheKey::new(&chain, req);
        if let Some(mut hit) = cache.get(&key) {
            hit.cache_hit = true;
            return hit;
        }
        let decision = self.decide_on_chain(req, &chain);
        cache.insert(key, decision.clone());
        decision
    }

    /// The combined formula for a point whose enclosing chain is `chain`.
    pub fn point_formula(&self, chain: &[usize]) -> Formula {
        let mut allows = Vec::new();
        let mut denies = Vec::new();
        for (_, effect, f) in self.relevant(chain) {
            match effect {
                Effect::Allow => allows.push(f.clone()),
                Effect::Deny => denies.push(f.clone()),
            }
        }
        combine_for_point(allows, denies)
    }

    fn relevant<'a>(&'a self, chain: &[usize]) -> impl Iterator<Item = (&'a str, Effect, &'a Formula)> + 'a {
        self.store.relevant_positions(chain).into_iter().map(|pos| {
            let (name, stored) = self.store.at(pos);
            (name, stored.ast.effect, self.store.formula_ref(stored))
        })
    }

    fn decide_on_chain(&self, req: &AccessRequest, chain: &[usize]) -> Decision {
        if chain.is_empty() {
            return Decision::default_deny();
        }
        // Equivalent to evaluating `combine_for_point(allows, denies)`: an
        // allow fires when its formula holds, and a deny formula `¬Q` blocks
        // when it evaluates false.
        let mut fired_allow = Vec::new();
        let mut fired_deny = Vec::new();
        for (name, effect, f) in self.relevant(chain) {
            let holds = evaluate(f, req);
            match effect {
                Effect::Allow if holds => fired_allow.push(name.to_string()),
                Effect::Deny if !holds => fired_deny.push(name.to_string()),
                _ => {}
            }
        }
        let allowed = !fired_allow.is_empty() && fired_deny.is_empty();

        Decision {
            verdict: if allowed { Verdict::Allow } else { Verdict::Deny },
            fired_allow: fired_allow.into(),
            fired_deny: fired_deny.into(),
            cache_hit: false,
        }
    }

    /// One decision per point, in order.
    pub fn decide_frame(
        &self,
        principal: &str,
        action: Action,
        points: &[Point3],
        user_location: Point3,
        time: TimeOfDay,
    ) -> Vec<Decision> {
        let mut req = AccessRequest::new(principal, action, [0.0; 3], user_location, time);
        points
            .iter()
            .map(|p| {
                req.point = *p;
                self.decide(&req)
            })
            .collect()
    }
}
