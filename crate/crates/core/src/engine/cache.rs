use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use lru::LruCache;

use super::Decision;
use crate::formula::AccessRequest;
use crate::lang::{Action, TimeOfDay};

pub const DEFAULT_CACHE_CAPACITY: usize = 4096;

/// Everything a decision depends on except the map point itself, which is
/// replaced by its enclosing chain of registry indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub chain: Box<[u32]>,
    pub principal: String,
    pub action: Action,
    /// Exact bit patterns of the user location.
    pub user_location: [u64; 3],
    pub time: TimeOfDay,
}

impl CacheKey {
    pub fn new(chain: &[usize], req: &AccessRequest) -> Self {
        CacheKey {
            chain: chain.iter().map(|&i| i as u32).collect(),
            principal: req.principal.clone(),
            action: req.action,
            user_location: req.user_location.map(f64::to_bits),
            time: req.time,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub len: usize,
    pub capacity: usize,
}

/// Thread-safe LRU map from [`CacheKey`] to the decision computed for it.
#[derive(Debug)]
pub struct DecisionCache {
    entries: Mutex<LruCache<CacheKey, Decision>>,
    capacity: NonZeroUsize,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl DecisionCache {
    /// A capacity of zero is treated as one.
    pub fn new(capacity: usize) -> Self {
        let capacity = NonZeroUsize::new(capacity).unwrap_or(NonZeroUsize::MIN);
        DecisionCache {
            entries: Mutex::new(LruCache::new(capacity)),
            capacity,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn get(&self, key: &CacheKey) -> Option<Decision> {
        let found = self.entries.lock().unwrap().get(key).cloned();
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    pub fn insert(&self, key: CacheKey, decision: Decision) {
        self.entries.lock().unwrap().put(key, decision);
    }

    pub fn clear(&self) {
        self.entries.lock().unwrap().clear();
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity.get()
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            len: self.len(),
            capacity: self.capacity(),
        }
    }
}

impl Default for DecisionCache {
    fn default() -> Self {
        DecisionCache::new(DEFAULT_CACHE_CAPACITY)
    }
}
