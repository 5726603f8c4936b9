//! Per-node content stores, placement strategies, and the cooperation
//! policy (search radius, copy limit).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{CentralityTable, Graph, NodeId};
use crate::workload::ObjectId;

/// Bounded LRU content store.
///
/// The byte sum of stored objects never exceeds the capacity; an object
/// larger than the whole store is never admitted.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheStore {
    capacity_bytes: u64,
    used_bytes: u64,
    clock: u64,
    stamps: HashMap<ObjectId, (u64, u64)>, // object -> (recency stamp, size)
    recency: BTreeMap<u64, ObjectId>,      // stamp -> object, oldest first
}

/// Result of [`CacheStore::insert`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    /// Stored; lists the objects evicted to make room, in eviction order.
    Inserted { evicted: Vec<ObjectId> },
    /// The object was already stored; its recency was refreshed.
    AlreadyPresent,
    /// The object exceeds the store capacity and was not admitted.
    TooLarge,
}

impl CacheStore {
    pub fn new(capacity_bytes: u64) -> Self {
        CacheStore {
            capacity_bytes,
            used_bytes: 0,
            clock: 0,
            stamps: HashMap::new(),
            recency: BTreeMap::new(),
        }
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.capacity_bytes
    }

    pub fn used_bytes(&self) -> u64 {
        self.used_bytes
    }

    pub fn len(&self) -> usize {
        self.stamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stamps.is_empty()
    }

    pub fn contains(&self, object: ObjectId) -> bool {
        self.stamps.contains_key(&object)
    }

    /// Lookup. A hit refreshes recency; a miss changes nothing.
    pub fn access(&mut self, object: ObjectId) -> bool {
        match self.stamps.get(&object).copied() {
            Some((stamp, size)) => {
                self.touch(object, stamp, size);
                true
            }
            None => false,
        }
    }

    /// Inserts an object, evicting least-recently-used entries until it
    /// fits. Inserting a present object only refreshes its recency.
    pub fn insert(&mut self, object: ObjectId, size_bytes: u64) -> InsertOutcome {
        if let Some((stamp, stored_size)) = self.stamps.get(&object).copied() {
            self.touch(object, stamp, stored_size);
            return InsertOutcome::AlreadyPresent;
        }
        if size_bytes > self.capacity_bytes {
            return InsertOutcome::TooLarge;
        }
        let mut evicted = Vec::new();
        while self.used_bytes + size_bytes > self.capacity_bytes {
            let (&stamp, &victim) = self.recency.iter().next().expect("used > 0 implies entries");
            self.recency.remove(&stamp);
            let (_, victim_size) = self.stamps.remove(&victim).expect("stamp maps to entry");
            self.used_bytes -= victim_size;
            evicted.push(victim);
        }
        self.clock += 1;
        self.stamps.insert(object, (self.clock, size_bytes));
        self.recency.insert(self.clock, object);
        self.used_bytes += size_bytes;
        debug_assert!(self.used_bytes <= self.capacity_bytes);
        InsertOutcome::Inserted { evicted }
    }

    fn touch(&mut self, object: ObjectId, stamp: u64, size: u64) {
        self.recency.remove(&stamp);
        self.clock += 1;
        self.recency.insert(self.clock, object);
        self.stamps.insert(object, (self.clock, size));
    }

    /// Stored objects as `(object, size)`, ascending by object id.
    pub fn objects(&self) -> Vec<(ObjectId, u64)> {
        let mut out: Vec<(ObjectId, u64)> =
            self.stamps.iter().map(|(&o, &(_, size))| (o, size)).collect();
        out.sort_unstable_by_key(|&(o, _)| o);
        out
    }

    /// Asserts internal consistency; used by tests and debug audits.
    pub fn check_invariants(&self) {
        let sum: u64 = self.stamps.values().map(|&(_, size)| size).sum();
        assert_eq!(sum, self.used_bytes, "byte accounting drifted");
        assert!(self.used_bytes <= self.capacity_bytes, "capacity exceeded");
        assert_eq!(self.stamps.len(), self.recency.len(), "recency index drifted");
    }
}

/// Placement strategy: which delivery-path routers store a passing object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Leave a copy everywhere on the path.
    Lce,
    /// Cache at exactly one uniformly chosen path router.
    Cachedbit,
    /// Cache at the path routers with betweenness below the quantile split.
    EdgeOnly,
    /// Cache at the path routers at or above the quantile split.
    CoreOnly,
}

/// Placement plus the cooperation policy knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub placement: Placement,
    /// Betweenness quantile splitting a delivery path's routers into edge
    /// and core groups.
    #[serde(default = "default_core_quantile")]
    pub core_quantile: f64,
    /// Cooperative search radius in hops; 0 is plain en-route lookup.
    #[serde(default)]
    pub search_radius: u32,
    /// Maximum simultaneous cached copies per object; `None` is unlimited.
    #[serde(default)]
    pub copy_limit: Option<u32>,
}

fn default_core_quantile() -> f64 {
    0.5
}

impl StrategyConfig {
    pub fn new(placement: Placement) -> Self {
        StrategyConfig { placement, core_quantile: 0.5, search_radius: 0, copy_limit: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.core_quantile > 0.0 && self.core_quantile < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "core_quantile must be in (0, 1), got {}",
                self.core_quantile
            )));
        }
        if self.copy_limit == Some(0) {
            return Err(Error::InvalidParameter("copy_limit must be at least 1".into()));
        }
        Ok(())
    }
}

/// Global bookkeeping of which nodes currently cache which object.
///
/// This is an idealized oracle visible only to the placement policy and the
/// scoped search; no discovery protocol is simulated. Origin servers are not
/// registered: they are permanent sources, not cached copies, and do not
/// count against the copy limit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CopyRegistry {
    holders: HashMap<ObjectId, BTreeSet<NodeId>>,
}

impl CopyRegistry {
    pub fn new() -> Self {
        CopyRegistry::default()
    }

    pub fn register(&mut self, node: NodeId, object: ObjectId) {
        self.holders.entry(object).or_default().insert(node);
    }

    pub fn deregister(&mut self, node: NodeId, object: ObjectId) {
        if let Some(set) = self.holders.get_mut(&object) {
            set.remove(&node);
            if set.is_empty() {
                self.holders.remove(&object);
            }
        }
    }

    pub fn copy_count(&self, object: ObjectId) -> usize {
        self.holders.get(&object).map_or(0, |s| s.len())
    }

    pub fn holds(&self, node: NodeId, object: ObjectId) -> bool {
        self.holders.get(&object).is_some_and(|s| s.contains(&node))
    }

    pub fn holders(&self, object: ObjectId) -> Option<&BTreeSet<NodeId>> {
        self.holders.get(&object)
    }

    /// Checks that the registry equals the union of the given stores.
    pub fn audit<'a>(&self, stores: impl Iterator<Item = (NodeId, &'a CacheStore)>) -> Result<()> {
        let mut expected: HashMap<ObjectId, BTreeSet<NodeId>> = HashMap::new();
        for (node, store) in stores {
            for (object, _) in store.objects() {
                expected.entry(object).or_default().insert(node);
            }
        }
        if expected == self.holders {
            Ok(())
        } else {
            Err(Error::InvalidParameter("copy registry out of sync with stores".into()))
        }
    }
}

/// Betweenness value splitting a run's caching nodes into edge and core
/// groups: the `quantile`-quantile (nearest rank) of the distinct
/// betweenness values. Nodes strictly below the threshold are edge, nodes at
/// or above it are core; taking the quantile over distinct values keeps
/// structurally symmetric nodes on the same side.
pub fn core_split_threshold(
    centrality: &CentralityTable,
    caching_nodes: &[NodeId],
    quantile: f64,
) -> f64 {
    let mut values: Vec<f64> = caching_nodes.iter().map(|&v| centrality.get(v)).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    if values.is_empty() {
        return 0.0;
    }
    let idx = ((quantile * values.len() as f64).floor() as usize).min(values.len() - 1);
    values[idx]
}

/// Decides which routers of a delivery path store the object.
///
/// `path_routers` holds the caching routers of the delivery path ordered
/// from the serving side towards the client; endpoints (the serving node and
/// the client) are excluded by the caller. The edge/core strategies keep the
/// path routers on their side of `core_threshold` (see
/// [`core_split_threshold`]). The chosen set is then truncated so the
/// registry never exceeds the copy limit, dropping candidates farthest from
/// the client first.
pub fn decide_placement(
    strategy: &StrategyConfig,
    path_routers: &[NodeId],
    object: ObjectId,
    centrality: &CentralityTable,
    core_threshold: f64,
    registry: &CopyRegistry,
    rng: &mut impl Rng,
) -> Vec<NodeId> {
    if path_routers.is_empty() {
        return Vec::new();
    }
    let selected: Vec<NodeId> = match strategy.placement {
        Placement::Lce => path_routers.to_vec(),
        Placement::Cachedbit => vec![path_routers[rng.gen_range(0..path_routers.len())]],
        Placement::EdgeOnly => {
            path_routers.iter().copied().filter(|&v| centrality.get(v) < core_threshold).collect()
        }
        Placement::CoreOnly => {
            path_routers.iter().copied().filter(|&v| centrality.get(v) >= core_threshold).collect()
        }
    };
    // Only new copies count against the limit; nodes already holding the
    // object are not placement targets (en-route lookup would have hit).
    let mut candidates: Vec<NodeId> =
        selected.into_iter().filter(|&v| !registry.holds(v, object)).collect();
    if let Some(k) = strategy.copy_limit {
        let allowed = (k as usize).saturating_sub(registry.copy_count(object));
        if candidates.len() > allowed {
            // Serving side comes first, so the front is farthest from the
            // client.
            candidates.drain(..candidates.len() - allowed);
        }
    }
    candidates
}

/// Breadth-first search for the nearest cached copy within `radius` hops of
/// `from`. Ties at equal distance break to the lowest node id. Radius 0
/// checks only `from` itself.
pub fn scoped_search(
    g: &Graph,
    from: NodeId,
    object: ObjectId,
    radius: u32,
    registry: &CopyRegistry,
) -> Option<(NodeId, u32)> {
    let holders = registry.holders(object)?;
    if holders.is_empty() {
        return None;
    }
    let mut seen = vec![false; g.node_count()];
    seen[from.0] = true;
    let mut level = vec![from];
    let mut depth = 0u32;
    loop {
        if let Some(&holder) = level.iter().filter(|v| holders.contains(v)).min() {
            return Some((holder, depth));
        }
        if depth == radius {
            return None;
        }
        let mut next = Vec::new();
        for &v in &level {
            for w in g.neighbors(v) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        level = next;
        depth += 1;
    }
}
