//! Drives a request stream through the cache network and emits the event
//! log that all metrics consume.
//!
//! For each request the simulator walks the deterministic shortest path from
//! the client towards the object's origin server. Each caching router on the
//! path is probed in order; on a local miss with a positive search radius,
//! a scoped search looks for a nearby copy before the walk continues. The
//! first router to achieve a hit wins. If nothing hits, the origin serves.
//! After serving, the object is cached along the client side of the delivery
//! path according to the placement strategy.

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::cache::{
    core_split_threshold, decide_placement, scoped_search, CacheStore, CopyRegistry,
    InsertOutcome, StrategyConfig,
};
use crate::error::{Error, Result};
use crate::seeds::{derive_seed, DOMAIN_PLACEMENT};
use crate::topology::{CentralityTable, Graph, NodeId, RoleAssignment};
use crate::workload::{aging_epoch_before, apply_aging, AgingSchedule, Catalog, ObjectId, RequestStream};

/// Everything one simulation run needs. Topology, roles, catalog, and stream
/// are borrowed; a run never mutates its inputs.
#[derive(Debug, Clone)]
pub struct SimConfig<'a> {
    pub graph: &'a Graph,
    pub centrality: &'a CentralityTable,
    pub roles: &'a RoleAssignment,
    pub catalog: &'a Catalog,
    pub stream: &'a RequestStream,
    pub strategy: StrategyConfig,
    /// Store capacity per caching node; 0 disables caching entirely (the
    /// footprint baseline run).
    pub capacity_bytes: u64,
    /// Leading fraction of the stream excluded from the event log.
    pub warmup_fraction: f64,
    /// Number of cache snapshots taken over the post-warmup stream.
    pub snapshot_epochs: usize,
    /// Popularity aging replayed at epoch boundaries. Must match the
    /// schedule and seed the stream was sampled with.
    pub aging: Option<AgingSchedule>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    CacheHit,
    ServerHit,
}

/// Per-request outcome record; the sole input to all metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitRecord {
    pub seq: usize,
    pub client: NodeId,
    pub object: ObjectId,
    pub size_bytes: u64,
    pub outcome: Outcome,
    pub serving_node: NodeId,
    /// Hops the data traveled: client to serving point, including any
    /// off-path detour from the scoped search.
    pub delivery_hops: u32,
    /// Hop distance from the client to the object's origin server.
    pub origin_hops: u32,
    /// Set on server hits from an external-classified server.
    pub server_external: bool,
}

/// A stored object in a snapshot: id, size in bytes, and the popularity
/// weight current at snapshot time.
pub type SnapshotEntry = (ObjectId, u64, f64);

/// Contents of every caching node at one measurement epoch, ascending by
/// node id; per node the stored objects ascending by object id.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheSnapshot {
    pub contents: Vec<(NodeId, Vec<SnapshotEntry>)>,
}

impl CacheSnapshot {
    /// `node,object,size` CSV export.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,object,size\n");
        for (node, objects) in &self.contents {
            for (object, size, _) in objects {
                out.push_str(&format!("{node},{object},{size}\n"));
            }
        }
        out
    }
}

/// Output of one run: post-warmup hit records, per-node served bytes, and
/// periodic cache snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub records: Vec<HitRecord>,
    /// Bytes served per node (post-warmup), indexed by node id.
    pub served_bytes: Vec<u64>,
    pub snapshots: Vec<CacheSnapshot>,
    /// The cache-equipped nodes of this run, ascending.
    pub caching_nodes: Vec<NodeId>,
}

impl EventLog {
    /// `seq,client,object,size,outcome,serving_node,delivery_hops,origin_hops,external` CSV.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("seq,client,object,size,outcome,serving_node,delivery_hops,origin_hops,external\n");
        for r in &self.records {
            let outcome = match r.outcome {
                Outcome::CacheHit => "cache_hit",
                Outcome::ServerHit => "server_hit",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.seq,
                r.client,
                r.object,
                r.size_bytes,
                outcome,
                r.serving_node,
                r.delivery_hops,
                r.origin_hops,
                r.server_external
            ));
        }
        out
    }
}

fn validate(config: &SimConfig) -> Result<()> {
    config.strategy.validate()?;
    if !(0.0..1.0).contains(&config.warmup_fraction) {
        return Err(Error::Config(format!(
            "warmup_fraction must be in [0, 1), got {}",
            config.warmup_fraction
        )));
    }
    if let Some(schedule) = &config.aging {
        schedule.validate()?;
    }
    config.roles.validate(config.graph)?;
    if config.roles.origin.len() < config.catalog.len() {
        return Err(Error::Config("roles assign origins to fewer objects than the catalog".into()));
    }
    for request in &config.stream.requests {
        if request.object.0 >= config.catalog.len() {
            return Err(Error::Config(format!(
                "request {} references object {} outside the catalog",
                request.seq, request.object
            )));
        }
        if !config.roles.is_client(request.client) {
            return Err(Error::Config(format!(
                "request {} comes from non-client node {}",
                request.seq, request.client
            )));
        }
    }
    // Every client must reach every origin server.
    for &client in &config.roles.clients {
        let dist = config.graph.bfs_distances(client);
        for &server in &config.roles.servers {
            if dist[server.0].is_none() {
                return Err(Error::Unreachable { from: client, to: server });
            }
        }
    }
    Ok(())
}

/// Runs one simulation. Deterministic: identical configs (including seed)
/// produce bit-identical event logs.
pub fn run(config: &SimConfig) -> Result<EventLog> {
    validate(config)?;
    let graph = config.graph;
    let n = graph.node_count();
    let caching_nodes = config.roles.caching_nodes(graph);
    let mut is_caching = vec![false; n];
    for &v in &caching_nodes {
        is_caching[v.0] = true;
    }
    let mut stores: Vec<CacheStore> =
        (0..n).map(|_| CacheStore::new(config.capacity_bytes)).collect();
    let mut registry = CopyRegistry::new();
    let core_threshold =
        core_split_threshold(config.centrality, &caching_nodes, config.strategy.core_quantile);
    let mut placement_rng =
        ChaCha12Rng::seed_from_u64(derive_seed(config.seed, DOMAIN_PLACEMENT));

    let total = config.stream.len();
    let post_len = ((1.0 - config.warmup_fraction) * total as f64).floor() as usize;
    let warmup_count = total - post_len;
    let snapshot_at = snapshot_indices(warmup_count, post_len, config.snapshot_epochs);

    // In debug builds the registry is audited against the stores: after
    // every request on small runs, sampled on large ones.
    #[cfg(debug_assertions)]
    let audit_interval = if total <= 2000 { 1 } else { 997 };

    let mut paths: HashMap<(usize, usize), Vec<NodeId>> = HashMap::new();
    let mut catalog_current = config.catalog.clone();
    let mut records = Vec::with_capacity(post_len);
    let mut served_bytes = vec![0u64; n];
    let mut snapshots = Vec::new();
    let mut candidates: Vec<NodeId> = Vec::new();

    for (i, request) in config.stream.requests.iter().enumerate() {
        if let Some(schedule) = &config.aging {
            if let Some(epoch) = aging_epoch_before(i, schedule.interval) {
                catalog_current = apply_aging(&catalog_current, schedule, epoch, config.seed);
            }
        }
        let object = request.object;
        let size = config.catalog.size_of(object);
        let origin = config.roles.origin_of(object);
        let path = paths.entry((request.client.0, origin.0)).or_insert_with(|| {
            graph.shortest_path(request.client, origin).expect("validated reachable")
        });
        let origin_hops = (path.len() - 1) as u32;

        // Walk the path client -> origin probing caching routers in order.
        let mut serve: Option<(Outcome, NodeId, u32)> = None;
        let mut hit_router_idx = 0usize;
        let mut detour: Option<Vec<NodeId>> = None;
        for (idx, &v) in path.iter().enumerate().skip(1) {
            if !is_caching[v.0] {
                continue;
            }
            if stores[v.0].access(object) {
                serve = Some((Outcome::CacheHit, v, idx as u32));
                hit_router_idx = idx;
                break;
            }
            if config.strategy.search_radius > 0 {
                if let Some((holder, dist)) =
                    scoped_search(graph, v, object, config.strategy.search_radius, &registry)
                {
                    stores[holder.0].access(object);
                    serve = Some((Outcome::CacheHit, holder, idx as u32 + dist));
                    hit_router_idx = idx;
                    detour =
                        Some(graph.shortest_path(holder, v).expect("holder reachable within radius"));
                    break;
                }
            }
        }
        let (outcome, serving_node, delivery_hops) =
            serve.unwrap_or((Outcome::ServerHit, origin, origin_hops));

        // Placement candidates: caching routers on the data path ordered
        // from the serving side to the client, endpoints excluded.
        candidates.clear();
        let mut seen: HashSet<NodeId> = HashSet::new();
        let client_side_from = match outcome {
            Outcome::ServerHit => path.len() - 1,
            Outcome::CacheHit => hit_router_idx,
        };
        if let Some(detour_path) = &detour {
            // Data travels holder -> on-path router before turning towards
            // the client; the router itself is part of the data path.
            for &v in detour_path.iter().skip(1) {
                if is_caching[v.0] && seen.insert(v) {
                    candidates.push(v);
                }
            }
        } else {
            // The serving endpoint itself never re-caches.
        }
        for idx in (1..client_side_from).rev() {
            let v = path[idx];
            if is_caching[v.0] && seen.insert(v) {
                candidates.push(v);
            }
        }
        let chosen = decide_placement(
            &config.strategy,
            &candidates,
            object,
            config.centrality,
            core_threshold,
            &registry,
            &mut placement_rng,
        );
        for node in chosen {
            if let InsertOutcome::Inserted { evicted } = stores[node.0].insert(object, size) {
                for gone in evicted {
                    registry.deregister(node, gone);
                }
                registry.register(node, object);
            }
        }

        if i >= warmup_count {
            records.push(HitRecord {
                seq: request.seq,
                client: request.client,
                object,
                size_bytes: size,
                outcome,
                serving_node,
                delivery_hops,
                origin_hops,
                server_external: match outcome {
                    Outcome::ServerHit => config.roles.is_external(serving_node),
                    Outcome::CacheHit => false,
                },
            });
            served_bytes[serving_node.0] += size;
        }
        if snapshot_at.contains(&i) {
            snapshots.push(snapshot_caches(&caching_nodes, &stores, &catalog_current));
        }

        #[cfg(debug_assertions)]
        if i % audit_interval == 0 {
            registry
                .audit(caching_nodes.iter().map(|&v| (v, &stores[v.0])))
                .expect("registry consistent with stores");
        }
    }

    #[cfg(debug_assertions)]
    registry
        .audit(caching_nodes.iter().map(|&v| (v, &stores[v.0])))
        .expect("registry consistent with stores");

    Ok(EventLog { records, served_bytes, snapshots, caching_nodes })
}

fn snapshot_indices(warmup_count: usize, post_len: usize, epochs: usize) -> HashSet<usize> {
    let mut at = HashSet::new();
    if post_len == 0 || epochs == 0 {
        return at;
    }
    for e in 1..=epochs {
        let offset = post_len * e / epochs;
        if offset > 0 {
            at.insert(warmup_count + offset - 1);
        }
    }
    at
}

/// Consistent copy of all stores with the popularity weights current at
/// snapshot time.
fn snapshot_caches(
    caching_nodes: &[NodeId],
    stores: &[CacheStore],
    catalog: &Catalog,
) -> CacheSnapshot {
    let contents = caching_nodes
        .iter()
        .map(|&v| {
            let objects = stores[v.0]
                .objects()
                .into_iter()
                .map(|(object, size)| (object, size, catalog.weight_of(object)))
                .collect();
            (v, objects)
        })
        .collect();
    CacheSnapshot { contents }
}
