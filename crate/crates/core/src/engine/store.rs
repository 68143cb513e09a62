use std::collections::{HashMap, HashSet};
use std::sync::{Arc, OnceLock};

use indexmap::IndexMap;

use crate::formula::{translate_policy, Formula};
use crate::lang::{validate_against_registry, Diagnostic, PolicyAst};
use crate::space::SpaceRegistry;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("a policy named \"{0}\" already exists")]
    DuplicateName(String),
    #[error("no policy named \"{0}\"")]
    UnknownPolicy(String),
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Unresolved(Vec<Diagnostic>),
}

#[derive(Debug, Clone)]
pub(crate) struct StoredPolicy {
    pub(crate) ast: PolicyAst,
    formula: OnceLock<Arc<Formula>>,
}

/// Policies indexed by every space id they mention, bound to one registry.
///
/// Formulas are translated on first use and memoised until the policy is
/// removed or replaced.
#[derive(Debug, Clone)]
pub struct PolicyStore {
    registry: Arc<SpaceRegistry>,
    policies: IndexMap<String, StoredPolicy>,
    by_space: HashMap<String, Vec<String>>,
    /// Registry space index to positions in `policies`.
    positions_by_space: Vec<Vec<u32>>,
}

impl PartialEq for PolicyStore {
    fn eq(&self, other: &Self) -> bool {
        self.policies.len() == other.policies.len()
            && self
                .policies
                .iter()
                .zip(other.policies.iter())
                .all(|((a, pa), (b, pb))| a == b && pa.ast == pb.ast)
            && self.by_space == other.by_space
    }
}

impl PolicyStore {
    pub fn new(registry: Arc<SpaceRegistry>) -> Self {
        PolicyStore {
            positions_by_space: vec![Vec::new(); registry.len()],
            registry,
            policies: IndexMap::new(),
            by_space: HashMap::new(),
        }
    }

    pub fn with_policies(
        registry: Arc<SpaceRegistry>,
        policies: impl IntoIterator<Item = PolicyAst>,
    ) -> Result<Self, StoreError> {
        let mut store = PolicyStore::new(registry);
        for p in policies {
            store.add_policy(p)?;
        }
        Ok(store)
    }

    pub fn registry(&self) -> &Arc<SpaceRegistry> {
        &self.registry
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&PolicyAst> {
        self.policies.get(name).map(|p| &p.ast)
    }

    /// Policies in insertion order.
    pub fn policies(&self) -> impl Iterator<Item = &PolicyAst> {
        self.policies.values().map(|p| &p.ast)
    }

    /// Names of the policies whose space expression or condition mentions `space_id`.
    pub fn policies_for_space(&self, space_id: &str) -> &[String] {
        self.by_space.get(space_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn add_policy(&mut self, policy: PolicyAst) -> Result<(), StoreError> {
        if self.policies.contains_key(&policy.name) {
            return Err(StoreError::DuplicateName(policy.name));
        }
        self.check_resolvable(&policy)?;
        let pos = self.policies.len() as u32;
        for id in policy.referenced_spaces() {
            self.by_space.entry(id.to_string()).or_default().push(policy.name.clone());
            let idx = self.registry.index_of(id).expect("resolved above");
            self.positions_by_space[idx].push(pos);
        }
        self.policies.insert(
            policy.name.clone(),
            StoredPolicy {
                ast: policy,
                formula: OnceLock::new(),
            },
        );
        Ok(())
    }

    pub fn remove_policy(&mut self, name: &str) -> Result<PolicyAst, StoreError> {
        let stored = self
            .policies
            .shift_remove(name)
            .ok_or_else(|| StoreError::UnknownPolicy(name.to_string()))?;
        for id in stored.ast.referenced_spaces() {
            if let Some(names) = self.by_space.get_mut(id) {
                names.retain(|n| n != name);
                if names.is_empty() {
                    self.by_space.remove(id);
                }
            }
        }
        self.reindex_positions();
        Ok(stored.ast)
    }

    /// Swaps in a new definition under the same name, keeping its position.
    pub fn replace_policy(&mut self, policy: PolicyAst) -> Result<PolicyAst, StoreError> {
        let Some(pos) = self.policies.get_index_of(&policy.name) else {
            return Err(StoreError::UnknownPolicy(policy.name));
        };
        self.check_resolvable(&policy)?;
        let name = policy.name.clone();
        let old = self.remove_policy(&name)?;
        self.add_policy(policy)?;
        let last = self.policies.len() - 1;
        self.policies.move_index(last, pos);
        self.reindex_positions();
        Ok(old)
    }

    fn reindex_positions(&mut self) {
        self.positions_by_space.iter_mut().for_each(Vec::clear);
        for (pos, p) in self.policies.values().enumerate() {
            for id in p.ast.referenced_spaces() {
                let idx = self.registry.index_of(id).expect("stored policies resolve");
                self.positions_by_space[idx].push(pos as u32);
            }
        }
    }

    /// Positions of the policies indexed under the given registry spaces,
    /// deduplicated, in chain order.
    pub(crate) fn relevant_positions(&self, chain: &[usize]) -> Vec<u32> {
        match chain {
            [] => Vec::new(),
            [only] => self.positions_by_space[*only].clone(),
            _ => {
                let mut seen = HashSet::new();
                chain
                    .iter()
                    .flat_map(|&i| self.positions_by_space[i].iter().copied())
                    .filter(|p| seen.insert(*p))
                    .collect()
            }
        }
    }

    pub(crate) fn at(&self, pos: u32) -> (&str, &StoredPolicy) {
        let (name, p) = self.policies.get_index(pos as usize).expect("position in range");
        (name.as_str(), p)
    }

    fn check_resolvable(&self, policy: &PolicyAst) -> Result<(), StoreError> {
        let diags = validate_against_registry(std::slice::from_ref(policy), &self.registry);
        if diags.is_empty() {
            Ok(())
        } else {
            Err(StoreError::Unresolved(diags))
        }
    }

    pub(crate) fn stored(&self, name: &str) -> Option<&StoredPolicy> {
        self.policies.get(name)
    }

    /// The policy's formula, translated on first request.
    pub fn formula(&self, name: &str) -> Option<Arc<Formula>> {
        self.stored(name).map(|p| self.formula_of(p))
    }

    pub(crate) fn formula_of(&self, p: &StoredPolicy) -> Arc<Formula> {
        p.formula
            .get_or_init(|| {
                // Every policy was checked against the registry on insert.
                Arc::new(translate_policy(&p.ast, &self.registry).expect("policy resolves against registry"))
            })
            .clone()
    }

    pub(crate) fn formula_ref<'a>(&self, p: &'a StoredPolicy) -> &'a Formula {
        p.formula.get_or_init(|| {
            Arc::new(translate_policy(&p.ast, &self.registry).expect("policy resolves against registry"))
        })
    }

    pub fn is_translated(&self, name: &str) -> bool {
        self.policies.get(name).is_some_and(|p| p.formula.get().is_some())
    }

    /// Names of the policies indexed under any of the given spaces, deduplicated,
    /// in chain order.
    pub fn relevant_to<'a>(&'a self, space_ids: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
        let mut out: Vec<&str> = Vec::new();
        let mut seen: HashSet<&str> = HashSet::new();
        for (k, id) in space_ids.into_iter().enumerate() {
            let names = self.policies_for_space(id);
            if k == 0 {
                // One space never lists a policy twice.
                out.extend(names.iter().map(String::as_str));
                continue;
            }
            if seen.is_empty() {
                seen.extend(out.iter().copied());
            }
            for name in names {
                if seen.insert(name) {
                    out.push(name);
                }
            }
        }
        out
    }
}
